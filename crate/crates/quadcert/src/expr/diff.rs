//! Symbolic differentiation. The mixed partial is produced by differentiating
//! in `x` and then in `y`; results are simplified only by constant folding
//! and 0/1 identities so derivative trees stay predictable.

use thiserror::Error;

use super::{Expr, Func};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    /// `abs` is not twice differentiable at zero crossings, so a mixed
    /// partial through an `abs` whose argument involves both variables is
    /// rejected.
    #[error("not differentiable: `{node}` applies abs to an argument depending on both x and y")]
    NotDifferentiable { node: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    X,
    Y,
}

/// Symbolic `d2 e / dx dy`, differentiating first in `x`, then in `y`.
pub fn differentiate_xy<S: Scalar>(e: &Expr<S>) -> Result<Expr<S>, DiffError> {
    check_abs_nodes(e)?;
    Ok(derive(&derive(e, Var::X), Var::Y))
}

/// Symbolic `d2 e / dy dx` (opposite order); agrees pointwise with
/// [`differentiate_xy`] for the supported grammar.
pub fn differentiate_yx<S: Scalar>(e: &Expr<S>) -> Result<Expr<S>, DiffError> {
    check_abs_nodes(e)?;
    Ok(derive(&derive(e, Var::Y), Var::X))
}

fn check_abs_nodes<S: Scalar>(e: &Expr<S>) -> Result<(), DiffError> {
    match e {
        Expr::Num(_) | Expr::X | Expr::Y | Expr::Pi | Expr::E => Ok(()),
        Expr::Call(Func::Abs, u) => {
            if u.depends_on_x() && u.depends_on_y() {
                return Err(DiffError::NotDifferentiable {
                    node: e.to_string(),
                });
            }
            check_abs_nodes(u)
        }
        Expr::Neg(u) | Expr::Call(_, u) => check_abs_nodes(u),
        Expr::Add(u, v)
        | Expr::Sub(u, v)
        | Expr::Mul(u, v)
        | Expr::Div(u, v)
        | Expr::Pow(u, v) => {
            check_abs_nodes(u)?;
            check_abs_nodes(v)
        }
    }
}

fn depends<S: Scalar>(e: &Expr<S>, var: Var) -> bool {
    match var {
        Var::X => e.depends_on_x(),
        Var::Y => e.depends_on_y(),
    }
}

fn derive<S: Scalar>(e: &Expr<S>, var: Var) -> Expr<S> {
    // skip whole subtrees that do not mention the variable
    if !depends(e, var) {
        return Expr::Num(S::zero());
    }
    match e {
        Expr::Num(_) | Expr::Pi | Expr::E => Expr::Num(S::zero()),
        Expr::X => Expr::Num(if var == Var::X { S::one() } else { S::zero() }),
        Expr::Y => Expr::Num(if var == Var::Y { S::one() } else { S::zero() }),
        Expr::Neg(u) => Expr::neg(derive(u, var)),
        Expr::Add(u, v) => Expr::add(derive(u, var), derive(v, var)),
        Expr::Sub(u, v) => Expr::sub(derive(u, var), derive(v, var)),
        Expr::Mul(u, v) => Expr::add(
            Expr::mul(derive(u, var), (**v).clone()),
            Expr::mul((**u).clone(), derive(v, var)),
        ),
        Expr::Div(u, v) => Expr::div(
            Expr::sub(
                Expr::mul(derive(u, var), (**v).clone()),
                Expr::mul((**u).clone(), derive(v, var)),
            ),
            Expr::mul((**v).clone(), (**v).clone()),
        ),
        Expr::Pow(u, w) => {
            if let Some(n) = w.as_literal() {
                // literal exponent: n * u^(n-1) * u'
                Expr::mul(
                    Expr::mul(
                        Expr::num(n),
                        Expr::pow((**u).clone(), Expr::num(n - S::one())),
                    ),
                    derive(u, var),
                )
            } else {
                // general exponent (parser guarantees a positive base):
                // u^w * (w' log u + w u'/u)
                Expr::mul(
                    e.clone(),
                    Expr::add(
                        Expr::mul(derive(w, var), Expr::log((**u).clone())),
                        Expr::mul((**w).clone(), Expr::div(derive(u, var), (**u).clone())),
                    ),
                )
            }
        }
        Expr::Call(f, u) => {
            let du = derive(u, var);
            let outer = match f {
                Func::Exp => Expr::exp((**u).clone()),
                Func::Log => return Expr::div(du, (**u).clone()),
                Func::Sin => Expr::cos((**u).clone()),
                Func::Cos => Expr::neg(Expr::sin((**u).clone())),
                Func::Sqrt => {
                    return Expr::div(
                        du,
                        Expr::mul(Expr::Num(S::one() + S::one()), Expr::sqrt((**u).clone())),
                    )
                }
                // d|u| = u/|u| * du away from zeros of u
                Func::Abs => return Expr::mul(Expr::div((**u).clone(), e.clone()), du),
            };
            Expr::mul(outer, du)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use approx::assert_relative_eq;

    fn fxy(text: &str) -> Expr<f64> {
        differentiate_xy(&parse(text).unwrap()).unwrap()
    }

    /// Central cross-difference oracle for the mixed partial.
    fn fd_mixed(e: &Expr<f64>, x: f64, y: f64, h: f64) -> f64 {
        let f = |x, y| e.eval(x, y).unwrap();
        (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h)
    }

    #[test]
    fn bilinear_gives_one() {
        assert_eq!(fxy("x*y"), Expr::Num(1.0));
    }

    #[test]
    fn square_product_matches_4xy() {
        let d = fxy("x^2*y^2");
        for (x, y) in [(0.3, 0.7), (-1.2, 0.4), (2.0, -3.0)] {
            assert_relative_eq!(d.eval(x, y).unwrap(), 4.0 * x * y, max_relative = 1e-14);
        }
    }

    #[test]
    fn exp_product_matches_finite_differences() {
        // d2/dxdy exp(x*y) = exp(x*y) (1 + x*y), checked against the
        // cross-stencil at 20 deterministic interior points
        let e = parse::<f64>("exp(x*y)").unwrap();
        let d = differentiate_xy(&e).unwrap();
        for i in 0..20 {
            let x = 0.05 + 0.9 * (i as f64) / 19.0;
            let y = 0.95 - 0.85 * (i as f64) / 19.0;
            let sym = d.eval(x, y).unwrap();
            let expected = (x * y).exp() * (1.0 + x * y);
            assert_relative_eq!(sym, expected, max_relative = 1e-13);
            assert_relative_eq!(sym, fd_mixed(&e, x, y, 1e-4), max_relative = 1e-6);
        }
    }

    #[test]
    fn separable_terms_vanish() {
        assert_eq!(fxy("x^2 + y^2"), Expr::Num(0.0));
        assert_eq!(fxy("sin(x) + cos(y)"), Expr::Num(0.0));
        assert_eq!(fxy("exp(x) + log(y)"), Expr::Num(0.0));
    }

    #[test]
    fn quotient_rule() {
        // d2/dxdy [x/y] = -1/y^2
        let d = fxy("x/y");
        for y in [0.5, 1.0, 2.0, -1.5] {
            assert_relative_eq!(d.eval(3.0, y).unwrap(), -1.0 / (y * y), max_relative = 1e-14);
        }
    }

    #[test]
    fn general_exponent_rule() {
        // d/dx e^(x*y) via the log form; compare to the closed form
        let e = parse::<f64>("e^(x*y)").unwrap();
        let d = differentiate_xy(&e).unwrap();
        for (x, y) in [(0.2f64, 0.8f64), (1.0, 1.0), (-0.5, 0.3)] {
            let expected = (x * y).exp() * (1.0 + x * y);
            assert_relative_eq!(d.eval(x, y).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn abs_of_single_variable_is_allowed() {
        // d2/dxdy [abs(x)*y] = x/|x| (the sign of x, away from 0)
        let d = fxy("abs(x)*y");
        assert_eq!(d.eval(2.0, 5.0).unwrap(), 1.0);
        assert_eq!(d.eval(-2.0, 5.0).unwrap(), -1.0);
    }

    #[test]
    fn abs_of_both_variables_is_rejected() {
        let e = parse::<f64>("abs(x*y)").unwrap();
        assert!(matches!(
            differentiate_xy(&e),
            Err(DiffError::NotDifferentiable { .. })
        ));
        let nested = parse::<f64>("sin(abs(x+y)) + x").unwrap();
        assert!(differentiate_xy(&nested).is_err());
    }

    #[test]
    fn mixed_partial_order_agrees() {
        for text in [
            "exp(x*y)",
            "x^3*y^2 - 2*x*y + sin(x)*cos(y)",
            "log(2 + x + y)",
            "sqrt(4 + x^2 + y^2)",
        ] {
            let e = parse::<f64>(text).unwrap();
            let dxy = differentiate_xy(&e).unwrap();
            let dyx = differentiate_yx(&e).unwrap();
            for (x, y) in [(0.1, 0.2), (0.7, 0.9), (0.5, 0.25)] {
                assert_relative_eq!(
                    dxy.eval(x, y).unwrap(),
                    dyx.eval(x, y).unwrap(),
                    max_relative = 1e-10
                );
            }
        }
    }
}
