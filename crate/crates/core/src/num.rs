//! Scalar abstraction for the real-valued parts of the engine.
//!
//! Embedding vectors, similarity scores, the recency weight of the ranking
//! function and reported accuracies are all generic over [`Scalar`], so the
//! same code runs in `f32` (compact vector snapshots) or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from a counter value.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).unwrap_or_else(Self::infinity)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Cosine similarity. Returns zero when either side has zero norm.
pub fn cosine<F: Scalar>(a: &[F], b: &[F]) -> F {
    if a.len() != b.len() {
        return F::zero();
    }
    let dot: F = a.iter().zip(b).map(|(x, y)| *x * *y).sum();
    let na: F = a.iter().map(|x| *x * *x).sum::<F>().sqrt();
    let nb: F = b.iter().map(|x| *x * *x).sum::<F>().sqrt();
    if na == F::zero() || nb == F::zero() {
        F::zero()
    } else {
        dot / (na * nb)
    }
}

/// L2-normalizes in place. Returns `false` (leaving the input untouched) when
/// the norm is zero or not finite.
pub fn normalize<F: Scalar>(v: &mut [F]) -> bool {
    let norm: F = v.iter().map(|x| *x * *x).sum::<F>().sqrt();
    if norm == F::zero() || !norm.is_finite() {
        return false;
    }
    for x in v.iter_mut() {
        *x = *x / norm;
    }
    true
}
