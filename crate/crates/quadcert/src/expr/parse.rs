//! Recursive-descent parser for the bivariate expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | 'x' | 'y' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'
//! FUNC   := 'exp'|'log'|'sin'|'cos'|'sqrt'|'abs'
//! ```
//!
//! `+ - * /` are left-associative, `^` binds tightest and takes a factor on
//! the right, and whitespace is ignored. NUMBER is a decimal literal with
//! optional fraction and exponent.

use thiserror::Error;

use super::{Expr, Func};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    /// `^` keeps models real-valued: an exponent that is not a non-negative
    /// integer literal is accepted only on a base that is syntactically
    /// positive (a positive literal, `pi`, `e`, `exp(..)` or `sqrt(..)`).
    #[error("invalid exponent at offset {offset}: {message}")]
    InvalidExponent { offset: usize, message: String },
}

impl ParseError {
    /// Byte offset into the source text where the error was detected.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::InvalidExponent { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    if i + 1 >= bytes.len() || !bytes[i + 1].is_ascii_digit() {
                        return Err(ParseError::Syntax {
                            offset: i,
                            message: "expected digits after decimal point".into(),
                        });
                    }
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // exponent part only when followed by digits, so `2e` lexes
                // as the number 2 then the constant e
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{s}`"),
                })?;
                toks.push((Tok::Num(v), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_owned()), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: i,
                    message: format!("unexpected character `{}`", &text[i..i + 1]),
                })
            }
        }
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

struct Parser<S: Scalar> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    _marker: std::marker::PhantomData<S>,
}

/// Parses source text into an expression tree. No simplification is applied:
/// the result mirrors the input structure exactly.
pub fn parse<S: Scalar>(text: &str) -> Result<Expr<S>, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser::<S> {
        toks: tokenize(text)?,
        pos: 0,
        _marker: std::marker::PhantomData,
    };
    let e = p.expr()?;
    let (tok, offset) = p.peek();
    if *tok != Tok::End {
        return Err(ParseError::Syntax {
            offset,
            message: format!("expected operator or end of input, found {}", tok.describe()),
        });
    }
    Ok(e)
}

impl<S: Scalar> Parser<S> {
    fn peek(&self) -> (&Tok, usize) {
        let (t, o) = &self.toks[self.pos];
        (t, *o)
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr<S>, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().0 {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr<S>, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().0 {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr<S>, ParseError> {
        if *self.peek().0 == Tok::Minus {
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr<S>, ParseError> {
        let base = self.atom()?;
        if *self.peek().0 == Tok::Caret {
            let (_, caret_offset) = self.bump();
            let exponent = self.factor()?;
            check_exponent(&base, &exponent, caret_offset)?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr<S>, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(lit(v))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::E),
                "exp" | "log" | "sin" | "cos" | "sqrt" | "abs" => {
                    let f = match name.as_str() {
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "sqrt" => Func::Sqrt,
                        _ => Func::Abs,
                    };
                    let (tok, offset) = self.bump();
                    if tok != Tok::LParen {
                        return Err(ParseError::Syntax {
                            offset,
                            message: format!(
                                "expected `(` after `{name}`, found {}",
                                tok.describe()
                            ),
                        });
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                _ => Err(ParseError::UnknownIdentifier { name, offset }),
            },
            other => Err(ParseError::Syntax {
                offset,
                message: format!("expected a value, found {}", other.describe()),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let (tok, offset) = self.bump();
        if tok != Tok::RParen {
            return Err(ParseError::Syntax {
                offset,
                message: format!("expected `)`, found {}", tok.describe()),
            });
        }
        Ok(())
    }
}

fn check_exponent<S: Scalar>(
    base: &Expr<S>,
    exponent: &Expr<S>,
    caret_offset: usize,
) -> Result<(), ParseError> {
    if exponent.as_nonneg_int().is_some() || base.is_syntactically_positive() {
        return Ok(());
    }
    Err(ParseError::InvalidExponent {
        offset: caret_offset,
        message: "exponent must be a non-negative integer literal unless the base is \
                  syntactically positive (positive literal, pi, e, exp(..), sqrt(..))"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = Expr<f64>;

    fn bx(e: E) -> Box<E> {
        Box::new(e)
    }

    #[test]
    fn minimal_product() {
        assert_eq!(parse::<f64>("x*y").unwrap(), E::Mul(bx(E::X), bx(E::Y)));
    }

    #[test]
    fn power_precedence() {
        let expected = E::Mul(
            bx(E::Pow(bx(E::X), bx(E::Num(2.0)))),
            bx(E::Pow(bx(E::Y), bx(E::Num(2.0)))),
        );
        assert_eq!(parse::<f64>("x^2*y^2").unwrap(), expected);
    }

    #[test]
    fn malformed_power_reports_offset() {
        match parse::<f64>("x^*y") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn left_associativity() {
        // 1 - 2 - 3 == (1 - 2) - 3
        let expected = E::Sub(
            bx(E::Sub(bx(E::Num(1.0)), bx(E::Num(2.0)))),
            bx(E::Num(3.0)),
        );
        assert_eq!(parse::<f64>("1-2-3").unwrap(), expected);
        // 8/4/2 == (8/4)/2
        let expected = E::Div(
            bx(E::Div(bx(E::Num(8.0)), bx(E::Num(4.0)))),
            bx(E::Num(2.0)),
        );
        assert_eq!(parse::<f64>("8/4/2").unwrap(), expected);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        // -x^2 parses as -(x^2)
        let expected = E::Neg(bx(E::Pow(bx(E::X), bx(E::Num(2.0)))));
        assert_eq!(parse::<f64>("-x^2").unwrap(), expected);
    }

    #[test]
    fn power_is_right_associative_via_factor() {
        // x^y is rejected (x may be negative) but 2^3^2 nests to the right
        let expected = E::Pow(
            bx(E::Num(2.0)),
            bx(E::Pow(bx(E::Num(3.0)), bx(E::Num(2.0)))),
        );
        assert_eq!(parse::<f64>("2^3^2").unwrap(), expected);
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(
            parse::<f64>(" x\t*\n y ").unwrap(),
            parse::<f64>("x*y").unwrap()
        );
    }

    #[test]
    fn unknown_identifier() {
        match parse::<f64>("x + foo(y)") {
            Err(ParseError::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 4);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn named_constants_and_functions() {
        let e = parse::<f64>("exp(pi) + e").unwrap();
        assert_eq!(
            e,
            E::Add(bx(E::Call(Func::Exp, bx(E::Pi))), bx(E::E))
        );
    }

    #[test]
    fn number_followed_by_e_constant() {
        // `2e` is the number 2 juxtaposed with `e`, which is a syntax error;
        // `2e3` is a single number; `2*e` multiplies by the constant.
        assert!(matches!(
            parse::<f64>("2e"),
            Err(ParseError::Syntax { offset: 1, .. })
        ));
        assert_eq!(parse::<f64>("2e3").unwrap(), E::Num(2000.0));
        assert_eq!(
            parse::<f64>("2*e").unwrap(),
            E::Mul(bx(E::Num(2.0)), bx(E::E))
        );
        assert_eq!(parse::<f64>("1.5e-2").unwrap(), E::Num(0.015));
    }

    #[test]
    fn exponent_restriction() {
        // negative base with non-integer exponent is rejected at the caret
        assert!(matches!(
            parse::<f64>("x^2.5"),
            Err(ParseError::InvalidExponent { offset: 1, .. })
        ));
        assert!(matches!(
            parse::<f64>("x^-2"),
            Err(ParseError::InvalidExponent { .. })
        ));
        assert!(matches!(
            parse::<f64>("(x+y)^y"),
            Err(ParseError::InvalidExponent { .. })
        ));
        // syntactically positive bases may take arbitrary exponents
        assert!(parse::<f64>("e^(x*y)").is_ok());
        assert!(parse::<f64>("2^x").is_ok());
        assert!(parse::<f64>("exp(x)^1.5").is_ok());
        assert!(parse::<f64>("sqrt(x)^-1").is_ok());
        // integer exponents are fine on any base
        assert!(parse::<f64>("(x+y)^4").is_ok());
        assert!(parse::<f64>("x^0").is_ok());
    }

    #[test]
    fn empty_and_garbage_inputs() {
        assert!(parse::<f64>("").is_err());
        assert!(parse::<f64>("   ").is_err());
        assert!(parse::<f64>("x +").is_err());
        assert!(parse::<f64>("(x").is_err());
        assert!(parse::<f64>("x)").is_err());
        assert!(parse::<f64>("sin x").is_err());
        assert!(parse::<f64>("x $ y").is_err());
        assert!(parse::<f64>("1..2").is_err());
    }
}
