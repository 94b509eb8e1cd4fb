//! Pointwise evaluation of expression trees with explicit domain errors.

use std::fmt;

use thiserror::Error;

use super::{Expr, Func};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    PowUndefined,
    NonFinite,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EvalErrorKind::LogNonPositive => "log of a non-positive value",
            EvalErrorKind::SqrtNegative => "sqrt of a negative value",
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::PowUndefined => "power with negative base or 0^negative",
            EvalErrorKind::NonFinite => "non-finite result",
        };
        f.write_str(s)
    }
}

/// Evaluation failed at `node` (printed subexpression) for the point `(x, y)`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{node}` at ({x}, {y}): {kind}")]
pub struct EvalError<S: Scalar> {
    pub node: String,
    pub x: S,
    pub y: S,
    pub kind: EvalErrorKind,
}

impl<S: Scalar> Expr<S> {
    /// IEEE evaluation of the tree at `(x, y)`. Any non-finite intermediate
    /// is reported as a domain error rather than propagated.
    pub fn eval(&self, x: S, y: S) -> Result<S, EvalError<S>> {
        let fail = |kind| {
            Err(EvalError {
                node: self.to_string(),
                x,
                y,
                kind,
            })
        };
        let v = match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Pi => S::PI(),
            Expr::E => S::E(),
            Expr::Neg(u) => -u.eval(x, y)?,
            Expr::Add(u, w) => u.eval(x, y)? + w.eval(x, y)?,
            Expr::Sub(u, w) => u.eval(x, y)? - w.eval(x, y)?,
            Expr::Mul(u, w) => u.eval(x, y)? * w.eval(x, y)?,
            Expr::Div(u, w) => {
                let den = w.eval(x, y)?;
                if den == S::zero() {
                    return fail(EvalErrorKind::DivisionByZero);
                }
                u.eval(x, y)? / den
            }
            Expr::Pow(u, w) => {
                let base = u.eval(x, y)?;
                let expo = w.eval(x, y)?;
                if expo.fract() == S::zero() && expo.abs() <= lit(2147483647.0) {
                    base.powi(expo.to_i32().expect("integer exponent fits i32"))
                } else if base < S::zero() {
                    return fail(EvalErrorKind::PowUndefined);
                } else if base == S::zero() && expo < S::zero() {
                    return fail(EvalErrorKind::PowUndefined);
                } else {
                    base.powf(expo)
                }
            }
            Expr::Call(f, u) => {
                let arg = u.eval(x, y)?;
                match f {
                    Func::Exp => arg.exp(),
                    Func::Log => {
                        if arg <= S::zero() {
                            return fail(EvalErrorKind::LogNonPositive);
                        }
                        arg.ln()
                    }
                    Func::Sin => arg.sin(),
                    Func::Cos => arg.cos(),
                    Func::Sqrt => {
                        if arg < S::zero() {
                            return fail(EvalErrorKind::SqrtNegative);
                        }
                        arg.sqrt()
                    }
                    Func::Abs => arg.abs(),
                }
            }
        };
        if !v.is_finite() {
            return fail(EvalErrorKind::NonFinite);
        }
        Ok(v)
    }
}
