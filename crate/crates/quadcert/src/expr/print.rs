//! Compact printing that re-parses to the identical tree.

use std::fmt;

use super::Expr;
use crate::scalar::Scalar;

/// Grammar production level the node can stand in without parentheses.
/// Higher binds tighter: sums 1, products 2, unary minus 3, powers 4,
/// atoms 5.
fn prec<S: Scalar>(e: &Expr<S>) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(_) | Expr::X | Expr::Y | Expr::Pi | Expr::E | Expr::Call(..) => 5,
    }
}

fn write_child<S: Scalar>(
    f: &mut fmt::Formatter<'_>,
    child: &Expr<S>,
    min_prec: u8,
) -> fmt::Result {
    if prec(child) < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl<S: Scalar> fmt::Display for Expr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Neg(u) => {
                f.write_str("-")?;
                write_child(f, u, 3)
            }
            Expr::Add(l, r) => {
                write_child(f, l, 1)?;
                f.write_str("+")?;
                // equal precedence on the right re-associates, so parenthesize
                write_child(f, r, 2)
            }
            Expr::Sub(l, r) => {
                write_child(f, l, 1)?;
                f.write_str("-")?;
                write_child(f, r, 2)
            }
            Expr::Mul(l, r) => {
                write_child(f, l, 2)?;
                f.write_str("*")?;
                write_child(f, r, 3)
            }
            Expr::Div(l, r) => {
                write_child(f, l, 2)?;
                f.write_str("/")?;
                write_child(f, r, 3)
            }
            Expr::Pow(base, exponent) => {
                // the base slot of `^` admits only atoms
                write_child(f, base, 5)?;
                f.write_str("^")?;
                write_child(f, exponent, 3)
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
