//! Scalar abstraction shared by the model, the marginal engine, the policies
//! and the oracles.
//!
//! Everything probabilistic is generic over [`Scalar`]; `f64` is the working
//! precision used by the harness and the CLI, `f32` is supported for
//! memory-bound experiments at a looser tolerance.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real number type used for probabilities, costs and utilities.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Absolute tolerance for "sums to one" checks and exact comparisons.
    const TOLERANCE: f64;

    /// Lossy conversion from `f64`; every finite `f64` maps to some value.
    fn of(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        Self::of(Self::TOLERANCE)
    }
}

impl Scalar for f64 {
    const TOLERANCE: f64 = 1e-9;
}

impl Scalar for f32 {
    const TOLERANCE: f64 = 1e-5;
}

/// Index of the largest value, ties broken toward the lowest index.
pub(crate) fn argmax_lowest<S: Scalar>(values: impl IntoIterator<Item = S>) -> Option<(usize, S)> {
    let mut best: Option<(usize, S)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}
