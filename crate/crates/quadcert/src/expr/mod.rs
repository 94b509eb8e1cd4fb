//! Bivariate expression trees: parsing, printing, evaluation, and symbolic
//! differentiation. This supplies the `f` and its mixed partial `d2f/dxdy`
//! that the cubature rule and every error bound consume.
//!
//! The grammar is fixed (see [`parse`]); trees are immutable after
//! construction and evaluation is pure, so expressions can be shared freely
//! across threads.

mod diff;
mod eval;
mod parse;
mod print;

use std::fmt;

use thiserror::Error;

pub use diff::{differentiate_xy, differentiate_yx, DiffError};
pub use eval::{EvalError, EvalErrorKind};
pub use parse::{parse, ParseError};

use crate::scalar::Scalar;

/// Built-in univariate functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree over variables `x`, `y`, numeric literals and the named
/// constants `pi` and `e`.
///
/// Numeric literals are kept non-negative by construction (the parser maps a
/// leading minus to [`Expr::Neg`], and the folding constructors do the same),
/// which makes printing and re-parsing structurally lossless.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<S: Scalar> {
    Num(S),
    X,
    Y,
    Pi,
    E,
    Neg(Box<Expr<S>>),
    Add(Box<Expr<S>>, Box<Expr<S>>),
    Sub(Box<Expr<S>>, Box<Expr<S>>),
    Mul(Box<Expr<S>>, Box<Expr<S>>),
    Div(Box<Expr<S>>, Box<Expr<S>>),
    Pow(Box<Expr<S>>, Box<Expr<S>>),
    Call(Func, Box<Expr<S>>),
}

impl<S: Scalar> Expr<S> {
    pub fn num(v: S) -> Self {
        if v < S::zero() {
            Expr::Neg(Box::new(Expr::Num(-v)))
        } else {
            Expr::Num(v)
        }
    }

    fn as_literal(&self) -> Option<S> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Neg(inner) => match **inner {
                Expr::Num(v) => Some(-v),
                _ => None,
            },
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == S::zero())
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == S::one())
    }

    /// Non-negative integer literal exponent, if this node is one.
    pub(crate) fn as_nonneg_int(&self) -> Option<S> {
        match self {
            Expr::Num(v) if *v >= S::zero() && v.fract() == S::zero() => Some(*v),
            _ => None,
        }
    }

    /// Whether the value of this node is non-negative for every input, judged
    /// syntactically: positive literal, `pi`, `e`, `exp(..)` or `sqrt(..)`.
    pub(crate) fn is_syntactically_positive(&self) -> bool {
        matches!(self, Expr::Pi | Expr::E | Expr::Call(Func::Exp | Func::Sqrt, _))
            || matches!(self, Expr::Num(v) if *v > S::zero())
    }

    pub fn depends_on_x(&self) -> bool {
        self.depends_on(true)
    }

    pub fn depends_on_y(&self) -> bool {
        self.depends_on(false)
    }

    fn depends_on(&self, x: bool) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi | Expr::E => false,
            Expr::X => x,
            Expr::Y => !x,
            Expr::Neg(u) | Expr::Call(_, u) => u.depends_on(x),
            Expr::Add(u, v)
            | Expr::Sub(u, v)
            | Expr::Mul(u, v)
            | Expr::Div(u, v)
            | Expr::Pow(u, v) => u.depends_on(x) || v.depends_on(x),
        }
    }

    // Folding constructors: constant folding plus 0/1 identities, nothing
    // more, so derivative trees stay predictable. Folds that would produce a
    // non-finite literal are left unfolded for eval to report.

    pub fn add(a: Expr<S>, b: Expr<S>) -> Expr<S> {
        if let (Some(x), Some(y)) = (a.as_literal(), b.as_literal()) {
            if (x + y).is_finite() {
                return Expr::num(x + y);
            }
        }
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr<S>, b: Expr<S>) -> Expr<S> {
        if let (Some(x), Some(y)) = (a.as_literal(), b.as_literal()) {
            if (x - y).is_finite() {
                return Expr::num(x - y);
            }
        }
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr<S>, b: Expr<S>) -> Expr<S> {
        if let (Some(x), Some(y)) = (a.as_literal(), b.as_literal()) {
            if (x * y).is_finite() {
                return Expr::num(x * y);
            }
        }
        if a.is_zero() || b.is_zero() {
            return Expr::Num(S::zero());
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr<S>, b: Expr<S>) -> Expr<S> {
        if let (Some(x), Some(y)) = (a.as_literal(), b.as_literal()) {
            if y != S::zero() && (x / y).is_finite() {
                return Expr::num(x / y);
            }
        }
        if b.is_one() {
            return a;
        }
        if a.is_zero() {
            return Expr::Num(S::zero());
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr<S>) -> Expr<S> {
        match a {
            Expr::Num(v) if v == S::zero() => Expr::Num(v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(base: Expr<S>, exponent: Expr<S>) -> Expr<S> {
        if let Some(e) = exponent.as_literal() {
            if e == S::zero() {
                return Expr::Num(S::one());
            }
            if e == S::one() {
                return base;
            }
            if let Some(b) = base.as_literal() {
                let v = if e.fract() == S::zero() && e.abs() <= crate::scalar::lit(1e9) {
                    b.powi(e.to_i32().unwrap())
                } else {
                    b.powf(e)
                };
                if v.is_finite() {
                    return Expr::num(v);
                }
            }
        }
        Expr::Pow(Box::new(base), Box::new(exponent))
    }

    pub fn call(f: Func, arg: Expr<S>) -> Expr<S> {
        Expr::Call(f, Box::new(arg))
    }

    pub fn exp(a: Expr<S>) -> Expr<S> {
        Expr::call(Func::Exp, a)
    }
    pub fn log(a: Expr<S>) -> Expr<S> {
        Expr::call(Func::Log, a)
    }
    pub fn sin(a: Expr<S>) -> Expr<S> {
        Expr::call(Func::Sin, a)
    }
    pub fn cos(a: Expr<S>) -> Expr<S> {
        Expr::call(Func::Cos, a)
    }
    pub fn sqrt(a: Expr<S>) -> Expr<S> {
        Expr::call(Func::Sqrt, a)
    }
    pub fn abs(a: Expr<S>) -> Expr<S> {
        Expr::call(Func::Abs, a)
    }
}

/// Failure to build a [`FunctionModel`] from source text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// A parsed function together with its exact symbolic mixed partial.
///
/// `fxy` is obtained by differentiating first in `x`, then in `y`; for the
/// supported smooth grammar the opposite order agrees pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionModel<S: Scalar> {
    pub f: Expr<S>,
    pub fxy: Expr<S>,
    pub source_text: String,
}

impl<S: Scalar> FunctionModel<S> {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let f = parse(text)?;
        Self::from_expr(f, text.to_owned())
    }

    pub fn from_expr(f: Expr<S>, source_text: String) -> Result<Self, ModelError> {
        let fxy = differentiate_xy(&f)?;
        Ok(Self {
            f,
            fxy,
            source_text,
        })
    }

    pub fn eval_f(&self, x: S, y: S) -> Result<S, EvalError<S>> {
        self.f.eval(x, y)
    }

    pub fn eval_fxy(&self, x: S, y: S) -> Result<S, EvalError<S>> {
        self.fxy.eval(x, y)
    }
}

impl<S: Scalar> fmt::Display for FunctionModel<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source_text)
    }
}
