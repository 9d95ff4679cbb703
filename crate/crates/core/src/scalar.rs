//! Scalar abstraction for the numeric kernels.
//!
//! Metrics, footprint accounting, study aggregation and the wire codec are
//! written once against [`Scalar`] and instantiated for `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type usable by every numeric module in this crate.
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
    /// Converts an `f64` constant. Every supported float type can represent
    /// (or round) any `f64`, so this never fails.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("float conversion from f64")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("float conversion from usize")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float conversion to f64")
    }
}

impl<T> Scalar for T where
    T: Float
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
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let total: T = values.iter().copied().sum();
    Some(total / T::from_count(values.len()))
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn sample_stddev<T: Scalar>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let m = mean(values).unwrap_or_else(T::zero);
    let ss: T = values.iter().map(|&v| (v - m) * (v - m)).sum();
    (ss / T::from_count(values.len() - 1)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stddev() {
        assert_eq!(mean::<f64>(&[]), None);
        assert_eq!(mean(&[0.2f64, 0.4, 0.6]).map(|m| (m * 1e12).round()), Some(0.4e12));
        assert_eq!(sample_stddev(&[0.7f64]), 0.0);
        // 2, 4, 4, 4, 5, 5, 7, 9: population sd 2, sample sd sqrt(32/7)
        let v = [2.0f32, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert!((sample_stddev(&v) - (32.0f32 / 7.0).sqrt()).abs() < 1e-6);
    }
}
