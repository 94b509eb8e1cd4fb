//! High-accuracy reference integration: adaptive 1-D and tensorized 2-D
//! Gauss-Legendre quadrature, plus the kernel-weighted double integral that
//! the identity check compares against.
//!
//! Error estimation pairs the order-n result with the order-2n result on the
//! same panel; a panel is accepted when the difference fits its share of the
//! tolerance, otherwise it is bisected.

mod tables;

use thiserror::Error;

use crate::cubature::KernelRoots;
use crate::domain::{Rectangle, RuleParams, ValidationError};
use crate::expr::{EvalError, Expr, FunctionModel};
use crate::scalar::{lit, Scalar};

/// Quadrature failure: either the depth budget ran out before the tolerance
/// was met (the best value found is carried along), or the integrand itself
/// failed to evaluate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError<S: Scalar> {
    #[error("tolerance not met at max depth: best value {value}, error estimate {err_est}")]
    ToleranceNotMet { value: S, err_est: S },

    #[error(transparent)]
    Eval(#[from] EvalError<S>),
}

/// Adaptive quadrature configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig<S: Scalar> {
    abs_tol: S,
    rel_tol: S,
    max_depth: u32,
    nodes_per_panel: u32,
}

impl<S: Scalar> QuadConfig<S> {
    pub fn new(
        abs_tol: S,
        rel_tol: S,
        max_depth: u32,
        nodes_per_panel: u32,
    ) -> Result<Self, ValidationError> {
        if !(abs_tol >= lit(1e-14)) {
            return Err(ValidationError::InvalidQuadConfig(
                "abs_tol must be >= 1e-14".into(),
            ));
        }
        if !(rel_tol > S::zero()) {
            return Err(ValidationError::InvalidQuadConfig(
                "rel_tol must be positive".into(),
            ));
        }
        if max_depth == 0 || max_depth > 60 {
            return Err(ValidationError::InvalidQuadConfig(
                "max_depth must be in 1..=60".into(),
            ));
        }
        if !matches!(nodes_per_panel, 8 | 16 | 32) {
            return Err(ValidationError::InvalidQuadConfig(
                "nodes_per_panel must be 8, 16 or 32".into(),
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_depth,
            nodes_per_panel,
        })
    }

    pub fn abs_tol(&self) -> S {
        self.abs_tol
    }
    pub fn rel_tol(&self) -> S {
        self.rel_tol
    }
    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }
    pub fn nodes_per_panel(&self) -> u32 {
        self.nodes_per_panel
    }

    /// Same rule with both tolerances divided by `factor`. The relative
    /// tolerance is floored at `8 eps` (below that the panel error estimates
    /// bottom out on roundoff) and the absolute one at 1e-14.
    pub fn tightened(&self, factor: f64) -> Self {
        let abs = (self.abs_tol / lit(factor)).max(lit(1e-14));
        let rel = (self.rel_tol / lit(factor)).max(S::epsilon() * lit(8.0));
        Self {
            abs_tol: abs,
            rel_tol: rel,
            ..*self
        }
    }
}

impl<S: Scalar> Default for QuadConfig<S> {
    /// Tolerances scaled to the scalar: `max(1e-12, 50 eps)` absolute and
    /// relative, depth 40, 16 nodes per panel.
    fn default() -> Self {
        let tol = lit::<S>(1e-12).max(S::epsilon() * lit(50.0));
        Self {
            abs_tol: tol.max(lit(1e-14)),
            rel_tol: tol,
            max_depth: 40,
            nodes_per_panel: 16,
        }
    }
}

/// Forced bisection levels before a panel may be accepted.
const MIN_DEPTH: u32 = 1;

fn table(n: u32) -> &'static [(f64, f64)] {
    match n {
        8 => &tables::GL8,
        16 => &tables::GL16,
        32 => &tables::GL32,
        64 => &tables::GL64,
        _ => unreachable!("nodes_per_panel validated to 8/16/32"),
    }
}

/// Fixed-order Gauss-Legendre sum of `g` over `[lo, hi]`.
fn gl_sum<S: Scalar, F>(g: &mut F, lo: S, hi: S, tab: &[(f64, f64)]) -> Result<S, QuadError<S>>
where
    F: FnMut(S) -> Result<S, QuadError<S>>,
{
    let half = (hi - lo) / lit(2.0);
    let mid = (lo + hi) / lit(2.0);
    let mut acc = S::zero();
    for &(node, weight) in tab {
        acc += lit::<S>(weight) * g(mid + half * lit(node))?;
    }
    Ok(acc * half)
}

/// Adaptive 1-D integration of `g` over `[lo, hi]`.
///
/// Returns `(value, err_est)` with `err_est <= max(abs_tol, rel_tol*|value|)`
/// on success. When the depth budget runs out first, the best value and the
/// achieved estimate are returned inside [`QuadError::ToleranceNotMet`].
pub fn integrate_1d<S: Scalar, F>(
    mut g: F,
    lo: S,
    hi: S,
    cfg: &QuadConfig<S>,
) -> Result<(S, S), QuadError<S>>
where
    F: FnMut(S) -> Result<S, QuadError<S>>,
{
    assert!(lo < hi, "integrate_1d requires lo < hi");
    let tab_lo = table(cfg.nodes_per_panel);
    let tab_hi = table(cfg.nodes_per_panel * 2);

    // coarse pass fixes the scale the relative tolerance refers to
    let coarse = gl_sum(&mut g, lo, hi, tab_hi)?;
    let tau = cfg.abs_tol.max(cfg.rel_tol * coarse.abs());

    let mut value = S::zero();
    let mut err_acc = S::zero();
    // (lo, hi, budget, depth); pushed right-first so panels are accumulated
    // left to right for a deterministic summation order
    let mut stack = vec![(lo, hi, tau, 0u32)];
    while let Some((a, b, budget, depth)) = stack.pop() {
        let mid = (a + b) / lit(2.0);
        let splittable = depth < cfg.max_depth && a < mid && mid < b;
        // one mandatory bisection level, so a feature invisible to the
        // coarse rule on the full interval still gets a second look
        if depth < MIN_DEPTH && splittable {
            let half_budget = budget / lit(2.0);
            stack.push((mid, b, half_budget, depth + 1));
            stack.push((a, mid, half_budget, depth + 1));
            continue;
        }
        let low = gl_sum(&mut g, a, b, tab_lo)?;
        let high = gl_sum(&mut g, a, b, tab_hi)?;
        // floor the estimate at the roundoff level of the panel sum
        let err = (high - low).abs().max(S::epsilon() * high.abs() * lit(4.0));
        if err <= budget || !splittable {
            value += high;
            err_acc += err;
        } else {
            let half_budget = budget / lit(2.0);
            stack.push((mid, b, half_budget, depth + 1));
            stack.push((a, mid, half_budget, depth + 1));
        }
    }
    // the acceptance contract is global: the accumulated estimate must fit
    // the tolerance implied by the final value
    if err_acc <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
        Ok((value, err_acc))
    } else {
        Err(QuadError::ToleranceNotMet {
            value,
            err_est: err_acc,
        })
    }
}

/// Adaptive 2-D integration of a raw integrand over a rectangle: adaptive in
/// x outside, adaptive in y inside with tolerances tightened by 10 (scaled by
/// the width so the accumulated inner error respects the outer budget).
pub fn integrate_2d_fn<S: Scalar, F>(
    g: F,
    r: &Rectangle<S>,
    cfg: &QuadConfig<S>,
) -> Result<(S, S), QuadError<S>>
where
    F: Fn(S, S) -> Result<S, QuadError<S>>,
{
    let inner_cfg = QuadConfig {
        abs_tol: (cfg.abs_tol / (lit::<S>(10.0) * r.width().max(S::one()))).max(lit(1e-14)),
        rel_tol: (cfg.rel_tol / lit(10.0)).max(S::epsilon()),
        ..*cfg
    };
    let mut inner_err_max = S::zero();
    let mut slice = |x: S| -> Result<S, QuadError<S>> {
        let (v, e) = integrate_1d(|y| g(x, y), r.c(), r.d(), &inner_cfg)?;
        if e > inner_err_max {
            inner_err_max = e;
        }
        Ok(v)
    };
    let (value, outer_err) = integrate_1d(&mut slice, r.a(), r.b(), cfg)?;
    Ok((value, outer_err + inner_err_max * r.width()))
}

/// Double integral of a parsed function over `r`.
pub fn integrate_2d<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    cfg: &QuadConfig<S>,
) -> Result<(S, S), QuadError<S>> {
    integrate_2d_fn(|x, y| f.eval_f(x, y).map_err(Into::into), r, cfg)
}

/// Average of the double integral: `(1/area) * iint f`.
pub fn average_integral<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    cfg: &QuadConfig<S>,
) -> Result<(S, S), QuadError<S>> {
    let (v, e) = integrate_2d(f, r, cfg)?;
    Ok((v / r.area(), e / r.area()))
}

/// The kernel-weighted right-hand side of the rule identity:
/// `(1/area) * iint K(x) M(y) fxy(x, y) dy dx`.
///
/// The kernels are piecewise linear with a value jump at the midlines, so the
/// rectangle is split there and each of the four quadrants integrates a
/// smooth integrand; adaptive depth is never spent straddling the jump.
pub fn kernel_weighted_integral<S: Scalar>(
    fxy: &Expr<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    cfg: &QuadConfig<S>,
) -> Result<S, QuadError<S>> {
    Ok(kernel_weighted_integral_with_estimate(fxy, r, params, cfg)?.0)
}

/// As [`kernel_weighted_integral`], also returning the accumulated
/// quadrature error estimate (averaged, like the value).
pub fn kernel_weighted_integral_with_estimate<S: Scalar>(
    fxy: &Expr<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    cfg: &QuadConfig<S>,
) -> Result<(S, S), QuadError<S>> {
    let roots = KernelRoots::new(r, params);
    let panel_cfg = cfg.tightened(4.0);
    let mut total = S::zero();
    let mut err = S::zero();
    // quadrants paired with the kernel roots active on each
    for (panel, x_root, y_root) in [
        (0usize, roots.x_lo, roots.y_lo),
        (1, roots.x_hi, roots.y_lo),
        (2, roots.x_lo, roots.y_hi),
        (3, roots.x_hi, roots.y_hi),
    ] {
        let quad_rect = r.quadrants()[panel];
        let (v, e) = integrate_2d_fn(
            |x, y| {
                let fv = fxy.eval(x, y)?;
                Ok((x - x_root) * (y - y_root) * fv)
            },
            &quad_rect,
            &panel_cfg,
        )?;
        total += v;
        err += e;
    }
    Ok((total / r.area(), err / r.area()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn cfg() -> QuadConfig<f64> {
        QuadConfig::default()
    }

    fn rect(a: f64, b: f64, c: f64, d: f64) -> Rectangle<f64> {
        Rectangle::new(a, b, c, d).unwrap()
    }

    #[test]
    fn config_invariants() {
        assert!(QuadConfig::new(1e-15, 1e-12, 40, 16).is_err());
        assert!(QuadConfig::new(1e-12, 0.0, 40, 16).is_err());
        assert!(QuadConfig::new(1e-12, 1e-12, 61, 16).is_err());
        assert!(QuadConfig::new(1e-12, 1e-12, 0, 16).is_err());
        assert!(QuadConfig::new(1e-12, 1e-12, 40, 12).is_err());
        assert!(QuadConfig::new(1e-10, 1e-10, 40, 32).is_ok());
    }

    #[test]
    fn gauss_tables_integrate_their_exactness_degree() {
        // n nodes are exact for polynomials of degree 2n-1
        for n in [8u32, 16, 32, 64] {
            let tab = table(n);
            let k = 2 * n - 2;
            let mut g = |x: f64| Ok(x.powi(k as i32) + x.powi(k as i32 + 1));
            let got = gl_sum(&mut g, -1.0, 1.0, tab).unwrap();
            let expected = 2.0 / (k as f64 + 1.0); // odd part cancels
            assert_relative_eq!(got, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn integrates_x_squared() {
        let (v, e) = integrate_1d(|x| Ok(x * x), 0.0, 1.0, &cfg()).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-12);
        assert!(e <= 1e-12);
    }

    #[test]
    fn integrates_constant_exactly() {
        let (v, _) = integrate_1d(|_| Ok(1.0), 0.0, 1.0, &cfg()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn integrates_exponential() {
        let (v, _) = integrate_1d(|x: f64| Ok(x.exp()), 0.0, 1.0, &cfg()).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::E - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn needs_subdivision_for_spiky_integrand() {
        // N(0, 0.01) bump: far beyond one panel of order 8
        let c = QuadConfig::new(1e-10, 1e-10, 40, 8).unwrap();
        let g = |x: f64| Ok((-(x * x) / 2.0e-4).exp());
        let (v, e) = integrate_1d(g, -1.0, 1.0, &c).unwrap();
        let expected = (2.0e-4 * std::f64::consts::PI).sqrt(); // erf(~70) == 1
        assert_abs_diff_eq!(v, expected, epsilon = 1e-10);
        assert!(e <= 1e-10);
    }

    #[test]
    fn depth_exhaustion_reports_best_value() {
        let c = QuadConfig::new(1e-14, 1e-14, 2, 8).unwrap();
        let g = |x: f64| Ok((50.0 * x).sin().abs());
        match integrate_1d(g, 0.0, 3.0, &c) {
            Err(QuadError::ToleranceNotMet { value, err_est }) => {
                // true value: int |sin(50x)| over [0, 3-ish] ~ 2/pi * 3 * ...
                assert!(value.is_finite());
                assert!(err_est > 1e-14);
            }
            other => panic!("expected ToleranceNotMet, got {other:?}"),
        }
    }

    #[test]
    fn eval_errors_propagate() {
        let f: FunctionModel<f64> = FunctionModel::parse("log(x)").unwrap();
        let r = rect(-1.0, 1.0, 0.0, 1.0);
        assert!(matches!(
            integrate_2d(&f, &r, &cfg()),
            Err(QuadError::Eval(_))
        ));
    }

    #[test]
    fn separable_polynomial_2d() {
        let f: FunctionModel<f64> = FunctionModel::parse("x*y").unwrap();
        let (v, _) = integrate_2d(&f, &rect(0.0, 1.0, 0.0, 1.0), &cfg()).unwrap();
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn sum_of_squares_2d() {
        let f: FunctionModel<f64> = FunctionModel::parse("x^2 + y^2").unwrap();
        let (v, e) = integrate_2d(&f, &rect(0.0, 1.0, 0.0, 1.0), &cfg()).unwrap();
        assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-12);
        assert!(e <= 1e-11);
    }

    #[test]
    fn constant_over_offset_rectangle() {
        let f: FunctionModel<f64> = FunctionModel::parse("1").unwrap();
        let (v, _) = integrate_2d(&f, &rect(1.0, 3.0, 2.0, 5.0), &cfg()).unwrap();
        assert_abs_diff_eq!(v, 6.0, epsilon = 1e-13);
    }

    #[test]
    fn kernel_weighted_vanishes_for_constant_mixed_partial() {
        // zero-mean kernels kill any constant integrand
        let fxy = Expr::<f64>::Num(1.0);
        for lambda in [0.0, 0.25, 0.5, 1.0] {
            let params = RuleParams::new(lambda).unwrap();
            let v =
                kernel_weighted_integral(&fxy, &rect(0.0, 1.0, 0.0, 1.0), &params, &cfg()).unwrap();
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
            let v2 =
                kernel_weighted_integral(&fxy, &rect(-2.0, 1.0, 3.0, 7.0), &params, &cfg()).unwrap();
            assert_abs_diff_eq!(v2, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn kernel_weighted_trapezoid_case() {
        // fxy = 4xy on the unit square at lambda = 1: both kernels are
        // x - 1/2, giving 4 * (1/12)^2 = 1/36
        let fxy = crate::expr::parse::<f64>("4*x*y").unwrap();
        let params = RuleParams::new(1.0).unwrap();
        let v = kernel_weighted_integral(&fxy, &rect(0.0, 1.0, 0.0, 1.0), &params, &cfg()).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 36.0, epsilon = 1e-13);
    }

    #[test]
    fn four_panel_split_matches_brute_force_across_jump() {
        // same integrand done the hard way: single adaptive pass over the
        // whole rectangle with the discontinuous kernel product
        let fxy = crate::expr::parse::<f64>("4*x*y + exp(x)").unwrap();
        let r = rect(0.0, 1.0, 0.0, 2.0);
        let params = RuleParams::new(0.3).unwrap();
        let split = kernel_weighted_integral(&fxy, &r, &params, &cfg()).unwrap();

        let roots = KernelRoots::new(&r, &params);
        let mx = r.mid_x();
        let my = r.mid_y();
        let brute = integrate_2d_fn(
            |x, y| {
                let k = if x <= mx { x - roots.x_lo } else { x - roots.x_hi };
                let m = if y <= my { y - roots.y_lo } else { y - roots.y_hi };
                Ok(k * m * fxy.eval(x, y)?)
            },
            &r,
            &cfg(),
        )
        .unwrap()
        .0 / r.area();
        assert_abs_diff_eq!(split, brute, epsilon = 1e-9);
    }

    #[test]
    fn monotone_refinement_on_smooth_corpus() {
        let functions: [(fn(f64) -> f64, f64, f64); 3] = [
            (|x| 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0),
            (|x| (5.0 * x).cos() * x.exp(), 0.0, 2.0),
            (|x| x.abs().sqrt(), -1.0, 1.0),
        ];
        for (g, lo, hi) in functions {
            let tight = QuadConfig::new(1e-13, 1e-13, 50, 8).unwrap();
            let reference = integrate_1d(|x| Ok(g(x)), lo, hi, &tight).unwrap().0;
            let mut tol = 1e-4;
            let mut prev_err = f64::INFINITY;
            while tol >= 1e-12 {
                let c = QuadConfig::new(tol, tol, 50, 8).unwrap();
                let (v, _) = integrate_1d(|x| Ok(g(x)), lo, hi, &c).unwrap();
                let err = (v - reference).abs();
                assert!(
                    err <= prev_err + 1e-15,
                    "halving tol increased error: {err} > {prev_err} at tol {tol}"
                );
                prev_err = err;
                tol /= 2.0;
            }
        }
    }
}
