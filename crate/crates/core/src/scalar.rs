//! Floating-point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for probabilities, costs and values.
///
/// Implemented for `f64` (the default everywhere) and `f32`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tolerance used when checking that a table row is a probability vector.
    fn stochastic_tolerance() -> Self;

    /// Converts an `f64` literal. Panics only if the target cannot represent it at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn stochastic_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn stochastic_tolerance() -> Self {
        1e-5
    }
}

/// Rounds a probability to a fixed number of decimals and returns an integer
/// key suitable for hashing or ordering.
pub(crate) fn grouping_key<S: Scalar>(p: S, decimals: i32) -> i64 {
    let scale = 10f64.powi(decimals);
    (p.to_f64_lossy() * scale).round() as i64
}

pub(crate) fn normalize<S: Scalar>(v: &mut [S]) -> Option<S> {
    let total: S = v.iter().copied().sum();
    if total <= S::zero() {
        return None;
    }
    for p in v.iter_mut() {
        *p = *p / total;
    }
    Some(total)
}
