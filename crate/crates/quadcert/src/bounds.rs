//! A-priori error bounds for the rule: the first-power bound, the Holder
//! bound with conjugate exponents, its p-free relaxation, and the power-mean
//! bound, plus a selector for the tightest applicable one.
//!
//! All bounds share the shape `area * coefficient(lambda, ..) * mean-term`
//! where the mean-term is built from `|d2f/dxdy|` (possibly raised to a
//! power q) at the four corners. They are valid when that corner quantity is
//! convex on the co-ordinates; the formulas themselves do not enforce the
//! hypothesis, callers pair them with the convexity check and label reports.

use std::fmt;

use thiserror::Error;

use crate::domain::{CornerData, HolderExponents, Rectangle, RuleParams, ValidationError};
use crate::expr::{EvalError, FunctionModel};
use crate::scalar::{lit, Scalar};

/// Which bound produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// First-power bound: `area/16 * factor * mean(|fxy| at corners)`.
    FirstPower,
    /// Holder bound: `area/(4 (p+1)^(2/p)) * factor * mean(|fxy|^q)^(1/q)`.
    Holder,
    /// p-free over-bound of [`BoundKind::Holder`] with coefficient `area/4`.
    HolderRelaxed,
    /// Power-mean bound: `area/16 * factor * mean(|fxy|^q)^(1/q)`, q >= 1.
    PowerMean,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::FirstPower => "first-power",
            BoundKind::Holder => "holder",
            BoundKind::HolderRelaxed => "holder-relaxed",
            BoundKind::PowerMean => "power-mean",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A computed bound value with its parameters. `p` is present only for the
/// Holder bound; `q` for every q-parametrized bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport<S: Scalar> {
    pub kind: BoundKind,
    pub value: S,
    pub lambda: S,
    pub p: Option<S>,
    pub q: Option<S>,
}

/// Failure while assembling a bound from a function model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError<S: Scalar> {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error(transparent)]
    Eval(#[from] EvalError<S>),
}

/// The shared lambda factor `(2 lambda^2 - 2 lambda + 1)^2`, computed in the
/// symmetric form `(lambda^2 + (1-lambda)^2)^2` so that
/// `lambda_factor(l) == lambda_factor(1 - l)` whenever `1 - l` is exact.
/// Ranges from 1/4 (at lambda = 1/2) to 1 (at the endpoints).
pub fn lambda_factor<S: Scalar>(params: &RuleParams<S>) -> S {
    let l = params.lambda();
    let m = S::one() - l;
    let t = l * l + m * m;
    t * t
}

/// First-power bound on `|avg iint f - Q_lambda(f)|`, taking `|fxy|` at the
/// corners (first powers).
pub fn bound_first_power<S: Scalar>(
    corners: &CornerData<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
) -> BoundReport<S> {
    let coeff = lambda_factor(params) / lit(16.0);
    BoundReport {
        kind: BoundKind::FirstPower,
        value: r.area() * (coeff * corners.mean()),
        lambda: params.lambda(),
        p: None,
        q: None,
    }
}

/// Holder bound, taking `|fxy|^q` at the corners and conjugate exponents.
pub fn bound_holder<S: Scalar>(
    corners_q: &CornerData<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    he: &HolderExponents<S>,
) -> BoundReport<S> {
    let p = he.p();
    let q = he.q();
    let denom = lit::<S>(4.0) * (p + S::one()).powf(lit::<S>(2.0) / p);
    let coeff = lambda_factor(params) / denom;
    BoundReport {
        kind: BoundKind::Holder,
        value: r.area() * (coeff * corners_q.mean().powf(q.recip())),
        lambda: params.lambda(),
        p: Some(p),
        q: Some(q),
    }
}

/// The p-independent relaxation of the Holder bound (coefficient `1/4` in
/// place of `1/(4 (p+1)^(2/p))`, an over-bound for every p > 1).
pub fn bound_holder_relaxed<S: Scalar>(
    corners_q: &CornerData<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    q: S,
) -> Result<BoundReport<S>, ValidationError> {
    if !q.is_finite() || q <= S::one() {
        return Err(ValidationError::InvalidExponent(format!(
            "relaxed Holder bound requires q > 1, got {q}"
        )));
    }
    let coeff = lambda_factor(params) / lit(4.0);
    Ok(BoundReport {
        kind: BoundKind::HolderRelaxed,
        value: r.area() * (coeff * corners_q.mean().powf(q.recip())),
        lambda: params.lambda(),
        p: None,
        q: Some(q),
    })
}

/// Power-mean bound, taking `|fxy|^q` at the corners, `q >= 1`. At `q = 1`
/// it coincides with [`bound_first_power`].
pub fn bound_power_mean<S: Scalar>(
    corners_q: &CornerData<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    q: S,
) -> Result<BoundReport<S>, ValidationError> {
    if !q.is_finite() || q < S::one() {
        return Err(ValidationError::InvalidExponent(format!(
            "power-mean bound requires q >= 1, got {q}"
        )));
    }
    let coeff = lambda_factor(params) / lit(16.0);
    Ok(BoundReport {
        kind: BoundKind::PowerMean,
        value: r.area() * (coeff * corners_q.mean().powf(q.recip())),
        lambda: params.lambda(),
        p: None,
        q: Some(q),
    })
}

/// `|fxy|` evaluated at the four corners of `r`.
pub fn abs_mixed_corners<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
) -> Result<CornerData<S>, EvalError<S>> {
    let [ac, ad, bc, bd] = r.corners();
    Ok(CornerData {
        v_ac: f.eval_fxy(ac.0, ac.1)?.abs(),
        v_ad: f.eval_fxy(ad.0, ad.1)?.abs(),
        v_bc: f.eval_fxy(bc.0, bc.1)?.abs(),
        v_bd: f.eval_fxy(bd.0, bd.1)?.abs(),
    })
}

/// The tightest bound over the first-power bound, the power-mean bound at
/// each grid q, and the Holder bound at each grid q > 1. Ties prefer the
/// bound with the simpler hypothesis: first-power, then power-mean, then
/// Holder.
pub fn best_bound<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    params: &RuleParams<S>,
    q_grid: &[S],
) -> Result<BoundReport<S>, BoundError<S>> {
    let corners = abs_mixed_corners(f, r)?;
    let mut best = bound_first_power(&corners, r, params);
    for &q in q_grid {
        let report = bound_power_mean(&corners.powered(q), r, params, q)?;
        if report.value < best.value {
            best = report;
        }
    }
    for &q in q_grid {
        if q <= S::one() {
            continue; // Holder needs a finite conjugate p
        }
        let he = HolderExponents::from_q(q)?;
        let report = bound_holder(&corners.powered(q), r, params, &he);
        if report.value < best.value {
            best = report;
        }
    }
    Ok(best)
}
