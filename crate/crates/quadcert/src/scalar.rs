//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type implementing [`Scalar`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the toolkit operates on. Implemented for `f32` and
/// `f64`; all tolerances and tabulated constants are stored as `f64` and
/// converted, so `f32` instantiations round the tables once at load.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal to the working scalar type.
///
/// Panics only if the target type cannot represent any rounding of `v`,
/// which cannot happen for the finite literals used in this crate.
#[inline]
pub fn lit<S: Scalar>(v: f64) -> S {
    S::from_f64(v).expect("finite f64 literal converts to any Scalar")
}
