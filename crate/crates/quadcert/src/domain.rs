//! Domain types shared by every module: rectangles, rule parameters,
//! conjugate exponent pairs, and corner data. Construction validates; the
//! rest of the crate assumes the invariants hold.

use thiserror::Error;

use crate::scalar::{lit, Scalar};

/// Validation failures for the value types in this module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("degenerate rectangle: require a < b and c < d, got [{a}, {b}] x [{c}, {d}]")]
    DegenerateRectangle { a: f64, b: f64, c: f64, d: f64 },

    #[error("rectangle bound is not finite")]
    NonFinite,

    #[error("lambda must lie in [0, 1], got {0}")]
    LambdaOutOfRange(f64),

    #[error("exponents are not conjugate: 1/{p} + 1/{q} = {sum}, expected 1")]
    NonConjugateExponents { p: f64, q: f64, sum: f64 },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("corner value must be non-negative, got {0}")]
    NegativeCorner(f64),

    #[error("invalid quadrature configuration: {0}")]
    InvalidQuadConfig(String),
}

/// Axis-aligned closed rectangle `[a, b] x [c, d]` with `a < b`, `c < d` and
/// all bounds finite. Zero-measure rectangles are rejected because every
/// averaged quantity downstream divides by the area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle<S: Scalar> {
    a: S,
    b: S,
    c: S,
    d: S,
}

impl<S: Scalar> Rectangle<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Result<Self, ValidationError> {
        validate_rectangle(a, b, c, d)
    }

    pub fn a(&self) -> S {
        self.a
    }
    pub fn b(&self) -> S {
        self.b
    }
    pub fn c(&self) -> S {
        self.c
    }
    pub fn d(&self) -> S {
        self.d
    }

    pub fn width(&self) -> S {
        self.b - self.a
    }

    pub fn height(&self) -> S {
        self.d - self.c
    }

    pub fn area(&self) -> S {
        self.width() * self.height()
    }

    pub fn mid_x(&self) -> S {
        (self.a + self.b) / lit(2.0)
    }

    pub fn mid_y(&self) -> S {
        (self.c + self.d) / lit(2.0)
    }

    /// The four corners in the fixed order (a,c), (a,d), (b,c), (b,d).
    pub fn corners(&self) -> [(S, S); 4] {
        [
            (self.a, self.c),
            (self.a, self.d),
            (self.b, self.c),
            (self.b, self.d),
        ]
    }

    /// Splits at the midlines into four quadrants, ordered by lowest (x, y)
    /// corner: SW, SE, NW, NE.
    pub fn quadrants(&self) -> [Rectangle<S>; 4] {
        let mx = self.mid_x();
        let my = self.mid_y();
        let q = |a, b, c, d| Rectangle { a, b, c, d };
        [
            q(self.a, mx, self.c, my),
            q(mx, self.b, self.c, my),
            q(self.a, mx, my, self.d),
            q(mx, self.b, my, self.d),
        ]
    }
}

/// Validates bounds and constructs a [`Rectangle`].
pub fn validate_rectangle<S: Scalar>(
    a: S,
    b: S,
    c: S,
    d: S,
) -> Result<Rectangle<S>, ValidationError> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
        return Err(ValidationError::NonFinite);
    }
    if a >= b || c >= d {
        return Err(ValidationError::DegenerateRectangle {
            a: a.to_f64().unwrap_or(f64::NAN),
            b: b.to_f64().unwrap_or(f64::NAN),
            c: c.to_f64().unwrap_or(f64::NAN),
            d: d.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(Rectangle { a, b, c, d })
}

/// Rule parameter `lambda` in `[0, 1]`: 0 is the midpoint-type rule, 1/3 the
/// Simpson-type rule, 1 the trapezoid-type rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleParams<S: Scalar> {
    lambda: S,
}

impl<S: Scalar> RuleParams<S> {
    pub fn new(lambda: S) -> Result<Self, ValidationError> {
        if !lambda.is_finite() || lambda < S::zero() || lambda > S::one() {
            return Err(ValidationError::LambdaOutOfRange(
                lambda.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }
}

/// Conjugate Holder exponents with `1/p + 1/q = 1` and `p > 1`. `q` is
/// primary; `p` is derived as `q/(q-1)` by [`HolderExponents::from_q`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderExponents<S: Scalar> {
    p: S,
    q: S,
}

impl<S: Scalar> HolderExponents<S> {
    const CONJUGACY_TOL: f64 = 1e-12;

    pub fn new(p: S, q: S) -> Result<Self, ValidationError> {
        if !(p.is_finite() && q.is_finite()) || p <= S::one() || q <= S::one() {
            return Err(ValidationError::InvalidExponent(format!(
                "p and q must be finite and > 1, got p = {p}, q = {q}"
            )));
        }
        let sum = p.recip() + q.recip();
        if (sum - S::one()).abs() > lit(Self::CONJUGACY_TOL) {
            return Err(ValidationError::NonConjugateExponents {
                p: p.to_f64().unwrap_or(f64::NAN),
                q: q.to_f64().unwrap_or(f64::NAN),
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { p, q })
    }

    /// Builds the pair from `q > 1`, deriving `p = q/(q-1)`.
    pub fn from_q(q: S) -> Result<Self, ValidationError> {
        if !q.is_finite() || q <= S::one() {
            return Err(ValidationError::InvalidExponent(format!(
                "q must be finite and > 1, got {q}"
            )));
        }
        Ok(Self {
            p: q / (q - S::one()),
            q,
        })
    }

    pub fn p(&self) -> S {
        self.p
    }
    pub fn q(&self) -> S {
        self.q
    }
}

/// Non-negative values of `|d2f/dxdy|` (or that quantity raised to a power q)
/// at the four rectangle corners, in the order (a,c), (a,d), (b,c), (b,d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerData<S: Scalar> {
    pub v_ac: S,
    pub v_ad: S,
    pub v_bc: S,
    pub v_bd: S,
}

impl<S: Scalar> CornerData<S> {
    pub fn new(v_ac: S, v_ad: S, v_bc: S, v_bd: S) -> Result<Self, ValidationError> {
        for v in [v_ac, v_ad, v_bc, v_bd] {
            if !(v >= S::zero()) {
                return Err(ValidationError::NegativeCorner(
                    v.to_f64().unwrap_or(f64::NAN),
                ));
            }
        }
        Ok(Self {
            v_ac,
            v_ad,
            v_bc,
            v_bd,
        })
    }

    pub fn mean(&self) -> S {
        (self.v_ac + self.v_ad + self.v_bc + self.v_bd) / lit(4.0)
    }

    pub fn max(&self) -> S {
        self.v_ac.max(self.v_ad).max(self.v_bc).max(self.v_bd)
    }

    /// Raises every corner value to the power `q` (values are non-negative,
    /// so this stays real for any q).
    pub fn powered(&self, q: S) -> CornerData<S> {
        let p = |v: S| v.powf(q);
        CornerData {
            v_ac: p(self.v_ac),
            v_ad: p(self.v_ad),
            v_bc: p(self.v_bc),
            v_bd: p(self.v_bd),
        }
    }
}
