//! Floating-point scalar abstraction for derived statistics.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for derived statistics: `f32` or `f64`.
///
/// Counters and bin edges stay exact integers throughout the crate; only the
/// derived quantities (means, deviations, percentiles, distribution masses)
/// are computed in floating point. `f64` is the default and represents every
/// bin midpoint `(lo + hi) / 2` exactly, since `lo + hi < 2^33`.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug {}

impl<T> Real for T where T: Float + FromPrimitive + ToPrimitive + Debug {}

/// Converts an exact `u64` count to the scalar type.
///
/// Exact for `f64` up to `2^53`; larger counts round to the nearest
/// representable value, which is the best any float consumer can do.
pub(crate) fn from_count<R: Real>(count: u64) -> R {
    R::from_u64(count).unwrap_or_else(|| R::max_value())
}

/// Converts an `f64` (bin midpoints, percentile ranks) to the scalar type.
pub(crate) fn from_f64<R: Real>(value: f64) -> R {
    R::from_f64(value).expect("finite f64 converts to any Real")
}
