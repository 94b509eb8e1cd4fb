//! The lambda-family cubature rule on a rectangle.
//!
//! The rule `Q_lambda(f) = line_term - point_term` estimates the averaged
//! integral `(1/area) iint f`. Its signed error is exactly the
//! kernel-weighted integral of the mixed partial (see
//! [`identity_residual`]), with the piecewise-linear kernels `K` and `M`
//! ([`kernel_x`], [`kernel_y`]) carrying lambda-shifted roots and a value
//! jump at the midlines. `lambda = 0` is the midpoint-type rule, `1/3` the
//! Simpson-type rule, `1` the trapezoid-type rule; every lambda in `[0, 1]`
//! is supported.

use thiserror::Error;

use crate::bounds::lambda_factor;
use crate::domain::{Rectangle, RuleParams};
use crate::expr::{EvalError, FunctionModel};
use crate::quad::{
    average_integral, integrate_1d, kernel_weighted_integral_with_estimate, QuadConfig, QuadError,
};
use crate::scalar::{lit, Scalar};

/// A point query outside the kernel's interval.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("kernel argument {point} lies outside [{lo}, {hi}]")]
pub struct OutOfDomain<S: Scalar> {
    pub point: S,
    pub lo: S,
    pub hi: S,
}

/// The lambda-shifted kernel roots: `K(x) = x - x_lo` on the left half of
/// the rectangle and `x - x_hi` on the right half, and likewise `M(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRoots<S: Scalar> {
    pub x_lo: S,
    pub x_hi: S,
    pub y_lo: S,
    pub y_hi: S,
}

impl<S: Scalar> KernelRoots<S> {
    pub fn new(r: &Rectangle<S>, params: &RuleParams<S>) -> Self {
        let half = lit::<S>(0.5);
        let l = params.lambda();
        Self {
            x_lo: r.a() + l * r.width() * half,
            x_hi: r.b() - l * r.width() * half,
            y_lo: r.c() + l * r.height() * half,
            y_hi: r.d() - l * r.height() * half,
        }
    }
}

/// The kernel `K` in the x direction. At the midline the left branch applies;
/// the value at that single point affects no integral, the tie-break merely
/// standardizes point queries.
pub fn kernel_x<S: Scalar>(
    x: S,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
) -> Result<S, OutOfDomain<S>> {
    if x < r.a() || x > r.b() {
        return Err(OutOfDomain {
            point: x,
            lo: r.a(),
            hi: r.b(),
        });
    }
    let roots = KernelRoots::new(r, params);
    Ok(if x <= r.mid_x() {
        x - roots.x_lo
    } else {
        x - roots.x_hi
    })
}

/// The kernel `M` in the y direction; mirrors [`kernel_x`].
pub fn kernel_y<S: Scalar>(
    y: S,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
) -> Result<S, OutOfDomain<S>> {
    if y < r.c() || y > r.d() {
        return Err(OutOfDomain {
            point: y,
            lo: r.c(),
            hi: r.d(),
        });
    }
    let roots = KernelRoots::new(r, params);
    Ok(if y <= r.mid_y() {
        y - roots.y_lo
    } else {
        y - roots.y_hi
    })
}

/// `(1/area) * (int |K|) * (int |M|)`, from the closed form
/// `int |K| = (b-a)^2 (2 lambda^2 - 2 lambda + 1) / 4`: equals
/// `area * (2 lambda^2 - 2 lambda + 1)^2 / 16`, the first-power bound's
/// leading factor.
pub fn kernel_abs_mass<S: Scalar>(r: &Rectangle<S>, params: &RuleParams<S>) -> S {
    r.area() * lambda_factor(params) / lit(16.0)
}

/// The nine point weights and six line weights of the rule. Zero weights at
/// `lambda` 0 or 1 are reported as zeros, not dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleWeights<S: Scalar> {
    /// weight of `f(mid_x, mid_y)`
    pub center: S,
    /// weight of each of the four corner values
    pub corner: S,
    /// weight of each of the four edge-midpoint values
    pub edge_midpoint: S,
    /// weight of each averaged midline integral (x and y)
    pub midline: S,
    /// weight of each averaged edge integral (bottom, top, left, right)
    pub edge_line: S,
}

pub fn rule_weights<S: Scalar>(params: &RuleParams<S>) -> RuleWeights<S> {
    let l = params.lambda();
    let one = S::one();
    RuleWeights {
        center: (one - l) * (one - l),
        corner: l * l / lit(4.0),
        edge_midpoint: l * (one - l) / lit(2.0),
        midline: one - l,
        edge_line: l / lit(2.0),
    }
}

/// The two halves of the rule for one rectangle and lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleBreakdown<S: Scalar> {
    pub point_term: S,
    pub line_term: S,
    pub lambda: S,
    pub rect: Rectangle<S>,
}

impl<S: Scalar> RuleBreakdown<S> {
    /// `Q_lambda(f) = line_term - point_term`, the rule's estimate of the
    /// averaged integral.
    pub fn estimate(&self) -> S {
        self.line_term - self.point_term
    }
}

/// A rule evaluation with the quadrature error accumulated in the six line
/// integrals, kept separately from the certified kernel-side error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleEvaluation<S: Scalar> {
    pub breakdown: RuleBreakdown<S>,
    pub line_err_est: S,
}

/// Weighted point-evaluation part: center, corner mean, and edge midpoints.
pub fn point_term<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
) -> Result<S, EvalError<S>> {
    let w = rule_weights(params);
    let (mx, my) = (r.mid_x(), r.mid_y());
    let center = f.eval_f(mx, my)?;
    let mut corners = S::zero();
    for (x, y) in r.corners() {
        corners += f.eval_f(x, y)?;
    }
    let edges = f.eval_f(mx, r.c())?
        + f.eval_f(mx, r.d())?
        + f.eval_f(r.a(), my)?
        + f.eval_f(r.b(), my)?;
    Ok(w.center * center + w.corner * corners + w.edge_midpoint * edges)
}

/// Weighted 1-D integral part: the two averaged midline integrals and the
/// four averaged edge integrals. Line integrals run 100x tighter than the
/// requested tolerance so the kernel-side bound dominates the error budget.
pub fn line_term<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    cfg: &QuadConfig<S>,
) -> Result<S, QuadError<S>> {
    Ok(line_term_with_estimate(f, r, params, cfg)?.0)
}

pub fn line_term_with_estimate<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    cfg: &QuadConfig<S>,
) -> Result<(S, S), QuadError<S>> {
    let tight = cfg.tightened(100.0);
    let w = rule_weights(params);
    let (mx, my) = (r.mid_x(), r.mid_y());

    let along_x = |y: S| -> Result<(S, S), QuadError<S>> {
        let (v, e) = integrate_1d(|x| f.eval_f(x, y).map_err(Into::into), r.a(), r.b(), &tight)?;
        Ok((v / r.width(), e / r.width()))
    };
    let along_y = |x: S| -> Result<(S, S), QuadError<S>> {
        let (v, e) = integrate_1d(|y| f.eval_f(x, y).map_err(Into::into), r.c(), r.d(), &tight)?;
        Ok((v / r.height(), e / r.height()))
    };

    let (mid_y_avg, e1) = along_y(mx)?;
    let (mid_x_avg, e2) = along_x(my)?;
    let (bottom, e3) = along_x(r.c())?;
    let (top, e4) = along_x(r.d())?;
    let (left, e5) = along_y(r.a())?;
    let (right, e6) = along_y(r.b())?;

    let value = w.midline * (mid_y_avg + mid_x_avg) + w.edge_line * (bottom + top + left + right);
    let err = w.midline * (e1 + e2) + w.edge_line * (e3 + e4 + e5 + e6);
    Ok((value, err))
}

/// Evaluates both halves of the rule.
pub fn evaluate_rule<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    cfg: &QuadConfig<S>,
) -> Result<RuleEvaluation<S>, QuadError<S>> {
    let point = point_term(f, r, params)?;
    let (line, line_err) = line_term_with_estimate(f, r, params, cfg)?;
    Ok(RuleEvaluation {
        breakdown: RuleBreakdown {
            point_term: point,
            line_term: line,
            lambda: params.lambda(),
            rect: *r,
        },
        line_err_est: line_err,
    })
}

/// `Q_lambda(f)`: the rule's estimate of the averaged integral
/// `(1/area) iint f`. Its signed error `avg - Q` equals the kernel-weighted
/// integral of the mixed partial.
pub fn approximate_integral<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    cfg: &QuadConfig<S>,
) -> Result<S, QuadError<S>> {
    Ok(evaluate_rule(f, r, params, cfg)?.breakdown.estimate())
}

/// Residual of the rule identity:
/// `[point - line + avg iint f] - (1/area) iint K M fxy`, with both sides
/// computed independently by the oracle. Near zero up to quadrature error.
pub fn identity_residual<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    cfg: &QuadConfig<S>,
) -> Result<S, QuadError<S>> {
    Ok(identity_residual_with_estimate(f, r, params, cfg)?.0)
}

/// As [`identity_residual`], also returning the combined quadrature error
/// estimate of everything that entered the residual.
pub fn identity_residual_with_estimate<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    cfg: &QuadConfig<S>,
) -> Result<(S, S), QuadError<S>> {
    let eval = evaluate_rule(f, r, params, cfg)?;
    let (avg, avg_err) = average_integral(f, r, cfg)?;
    let (kernel_side, kernel_err) = kernel_weighted_integral_with_estimate(&f.fxy, r, params, cfg)?;
    let left = eval.breakdown.point_term - eval.breakdown.line_term + avg;
    let combined = eval.line_err_est + avg_err + kernel_err;
    Ok((left - kernel_side, combined))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_2d_fn;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn rect(a: f64, b: f64, c: f64, d: f64) -> Rectangle<f64> {
        Rectangle::new(a, b, c, d).unwrap()
    }

    fn unit() -> Rectangle<f64> {
        rect(0.0, 1.0, 0.0, 1.0)
    }

    fn rp(l: f64) -> RuleParams<f64> {
        RuleParams::new(l).unwrap()
    }

    fn model(text: &str) -> FunctionModel<f64> {
        FunctionModel::parse(text).unwrap()
    }

    fn cfg() -> QuadConfig<f64> {
        QuadConfig::default()
    }

    #[test]
    fn kernel_x_at_left_edge() {
        for lambda in [0.0, 0.3, 1.0] {
            let r = rect(2.0, 6.0, 0.0, 1.0);
            let k = kernel_x(2.0, &r, &rp(lambda)).unwrap();
            assert_abs_diff_eq!(k, -lambda * 4.0 / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_x_midpoint_uses_left_branch() {
        let r = unit();
        let k = kernel_x(0.5, &r, &rp(0.0)).unwrap();
        assert_eq!(k, 0.5); // (b-a)/2 at lambda = 0
    }

    #[test]
    fn kernel_x_trapezoid_interior_point() {
        let k = kernel_x(0.25, &unit(), &rp(1.0)).unwrap();
        assert_eq!(k, -0.25);
    }

    #[test]
    fn kernel_y_at_top_edge() {
        for lambda in [0.0, 0.5, 1.0] {
            let r = rect(0.0, 1.0, 1.0, 5.0);
            let m = kernel_y(5.0, &r, &rp(lambda)).unwrap();
            assert_abs_diff_eq!(m, lambda * 4.0 / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_y_midpoint_at_lambda_one_vanishes() {
        let r = unit();
        assert_eq!(kernel_y(0.5, &r, &rp(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn kernel_y_half_lambda_zero_crossing() {
        let r = rect(0.0, 1.0, 0.0, 2.0);
        assert_eq!(kernel_y(1.5, &r, &rp(0.5)).unwrap(), 0.0);
    }

    #[test]
    fn kernel_rejects_outside_points() {
        assert!(kernel_x(-0.1, &unit(), &rp(0.5)).is_err());
        assert!(kernel_y(1.1, &unit(), &rp(0.5)).is_err());
    }

    #[test]
    fn kernel_antisymmetry_about_midline() {
        let r = rect(1.0, 3.0, 0.0, 1.0);
        for lambda in [0.0, 0.2, 1.0 / 3.0, 0.7, 1.0] {
            let p = rp(lambda);
            for u in [0.1, 0.5, 0.99, 1.0] {
                let k_plus = kernel_x(2.0 + u, &r, &p).unwrap();
                let k_minus = kernel_x(2.0 - u, &r, &p).unwrap();
                assert_abs_diff_eq!(k_plus, -k_minus, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn kernel_mean_zero_and_abs_mass_closed_form() {
        let r = rect(-1.0, 2.0, 0.0, 1.0);
        let c = cfg();
        for lambda in [0.0, 1.0 / 3.0, 0.5, 0.8, 1.0] {
            let p = rp(lambda);
            let (mean, _) =
                integrate_1d(|x| Ok(kernel_x(x, &r, &p).unwrap()), -1.0, 2.0, &c).unwrap();
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-12);

            let (abs_mass, _) =
                integrate_1d(|x| Ok(kernel_x(x, &r, &p).unwrap().abs()), -1.0, 2.0, &c).unwrap();
            let t = 2.0 * lambda * lambda - 2.0 * lambda + 1.0;
            assert_abs_diff_eq!(abs_mass, 9.0 * t / 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn abs_mass_special_values() {
        assert_relative_eq!(kernel_abs_mass(&unit(), &rp(0.0)), 1.0 / 16.0);
        assert_relative_eq!(kernel_abs_mass(&unit(), &rp(0.5)), 1.0 / 64.0);
        assert_relative_eq!(
            kernel_abs_mass(&unit(), &rp(1.0 / 3.0)),
            25.0 / 1296.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn point_term_collapses_at_lambda_extremes() {
        let f = model("exp(x)*sin(y) + 2");
        let r = rect(0.25, 1.0, 0.5, 2.0);
        let center = f.eval_f(r.mid_x(), r.mid_y()).unwrap();
        assert_abs_diff_eq!(
            point_term(&f, &r, &rp(0.0)).unwrap(),
            center,
            epsilon = 1e-15
        );
        let corner_mean = r
            .corners()
            .iter()
            .map(|&(x, y)| f.eval_f(x, y).unwrap())
            .sum::<f64>()
            / 4.0;
        assert_abs_diff_eq!(
            point_term(&f, &r, &rp(1.0)).unwrap(),
            corner_mean,
            epsilon = 1e-15
        );
    }

    #[test]
    fn point_term_square_product_trapezoid() {
        // corners of x^2 y^2 on the unit square: (0 + 0 + 0 + 1)/4
        assert_abs_diff_eq!(
            point_term(&model("x^2*y^2"), &unit(), &rp(1.0)).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn line_term_midpoint_rule_sum_of_squares() {
        // lambda = 0 on x^2 + y^2: int(1/4 + y^2) + int(x^2 + 1/4) = 7/6
        let v = line_term(&model("x^2 + y^2"), &unit(), &rp(0.0), &cfg()).unwrap();
        assert_abs_diff_eq!(v, 7.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn line_term_trapezoid_square_product() {
        let v = line_term(&model("x^2*y^2"), &unit(), &rp(1.0), &cfg()).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn weight_consistency_for_constant_one() {
        let f = model("1");
        for lambda in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
            let p = rp(lambda);
            let point = point_term(&f, &unit(), &p).unwrap();
            assert_abs_diff_eq!(point, 1.0, epsilon = 1e-15);
            let line = line_term(&f, &unit(), &p, &cfg()).unwrap();
            assert_abs_diff_eq!(line, 2.0, epsilon = 1e-13);
            // point - line + avg(1) == 0
            assert_abs_diff_eq!(point - line + 1.0, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn lambda_specialization_weights() {
        // trapezoid end: pure corner mean plus half-weighted edge averages
        let w1 = rule_weights(&rp(1.0));
        assert_eq!(w1.center, 0.0);
        assert_eq!(w1.corner, 0.25);
        assert_eq!(w1.edge_midpoint, 0.0);
        assert_eq!(w1.midline, 0.0);
        assert_eq!(w1.edge_line, 0.5);
        // midpoint end: pure center plus full-weighted midlines
        let w0 = rule_weights(&rp(0.0));
        assert_eq!(w0.center, 1.0);
        assert_eq!(w0.corner, 0.0);
        assert_eq!(w0.edge_midpoint, 0.0);
        assert_eq!(w0.midline, 1.0);
        assert_eq!(w0.edge_line, 0.0);
        // Simpson-type interior: all nine points active, weights sum to 1
        let ws = rule_weights(&rp(1.0 / 3.0));
        let total = ws.center + 4.0 * ws.corner + 4.0 * ws.edge_midpoint;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
        assert!(ws.center > 0.0 && ws.corner > 0.0 && ws.edge_midpoint > 0.0);
    }

    #[test]
    fn rule_is_exact_for_bilinear() {
        let f = model("x*y");
        for lambda in [0.0, 0.37, 1.0] {
            let q = approximate_integral(&f, &unit(), &rp(lambda), &cfg()).unwrap();
            assert_abs_diff_eq!(q, 0.25, epsilon = 1e-13);
        }
    }

    #[test]
    fn square_product_trapezoid_estimate_and_error() {
        let f = model("x^2*y^2");
        let q = approximate_integral(&f, &unit(), &rp(1.0), &cfg()).unwrap();
        assert_abs_diff_eq!(q, 1.0 / 12.0, epsilon = 1e-12);
        // avg - Q = 1/9 - 1/12 = 1/36, which the kernel side reproduces
        let kernel = crate::quad::kernel_weighted_integral(&f.fxy, &unit(), &rp(1.0), &cfg())
            .unwrap();
        assert_abs_diff_eq!(1.0 / 9.0 - q, kernel, epsilon = 1e-12);
    }

    #[test]
    fn exact_for_separable_plus_bilinear() {
        let f = model("exp(x) + sin(y) + 3*x*y");
        let r = rect(0.0, 1.0, 0.0, 2.0);
        let (avg, _) = average_integral(&f, &r, &cfg()).unwrap();
        for lambda in [0.0, 0.6, 1.0] {
            let q = approximate_integral(&f, &r, &rp(lambda), &cfg()).unwrap();
            assert_abs_diff_eq!(q, avg, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_residual_square_product() {
        let f = model("x^2*y^2");
        for lambda in [0.0, 1.0 / 3.0, 1.0] {
            let res = identity_residual(&f, &unit(), &rp(lambda), &cfg()).unwrap();
            assert!(res.abs() <= 1e-10, "residual {res} at lambda {lambda}");
        }
    }

    #[test]
    fn identity_residual_exp_offset_rectangle() {
        let f = model("exp(x+y)");
        let r = rect(0.0, 1.0, 0.0, 2.0);
        let res = identity_residual(&f, &r, &rp(0.7), &cfg()).unwrap();
        assert!(res.abs() <= 1e-8, "residual {res}");
    }

    #[test]
    fn identity_residual_zero_mixed_partial() {
        let f = model("x + y");
        let r = rect(-1.0, 2.0, 0.5, 3.0);
        for lambda in [0.0, 0.5, 1.0] {
            let res = identity_residual(&f, &r, &rp(lambda), &cfg()).unwrap();
            assert!(res.abs() <= 1e-12, "residual {res}");
        }
    }

    #[test]
    fn kernel_weighted_midpoint_matches_left_side_reconstruction() {
        // lambda = 0 cross-check of the identity for fxy = 4xy
        let f = model("x^2*y^2");
        let p = rp(0.0);
        let kernel = crate::quad::kernel_weighted_integral(&f.fxy, &unit(), &p, &cfg()).unwrap();
        let point = point_term(&f, &unit(), &p).unwrap();
        let line = line_term(&f, &unit(), &p, &cfg()).unwrap();
        let (avg, _) = average_integral(&f, &unit(), &cfg()).unwrap();
        assert_abs_diff_eq!(kernel, point - line + avg, epsilon = 1e-10);
        // closed form for this case: 1/144
        assert_abs_diff_eq!(kernel, 1.0 / 144.0, epsilon = 1e-12);
    }

    #[test]
    fn kernel_point_functions_agree_with_weighted_integral() {
        // integrate K(x) M(y) fxy via the point kernels and brute force,
        // then compare with the quadrant-split implementation
        let f = model("exp(x)*y^2");
        let r = rect(0.0, 2.0, -1.0, 1.0);
        let p = rp(0.4);
        let split =
            crate::quad::kernel_weighted_integral(&f.fxy, &r, &p, &cfg()).unwrap();
        let brute = integrate_2d_fn(
            |x, y| {
                let k = kernel_x(x, &r, &p).unwrap();
                let m = kernel_y(y, &r, &p).unwrap();
                Ok(k * m * f.eval_fxy(x, y)?)
            },
            &r,
            &cfg(),
        )
        .unwrap()
        .0 / r.area();
        assert_abs_diff_eq!(split, brute, epsilon = 1e-9);
    }

    #[test]
    fn f32_instantiation_runs() {
        let f: FunctionModel<f32> = FunctionModel::parse("x*y").unwrap();
        let r = Rectangle::<f32>::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let p = RuleParams::<f32>::new(0.5).unwrap();
        let q = approximate_integral(&f, &r, &p, &QuadConfig::default()).unwrap();
        assert!((q - 0.25).abs() < 1e-5);
    }
}
