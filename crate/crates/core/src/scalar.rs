//! Numeric bounds for the attack harness.
//!
//! Boundary costs are sums of squared 8-bit differences, so they are exact in `u64` and
//! in any float wide enough for the block size (`f32` is exact up to 2^24). Metrics are
//! ratios and need a float.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, NumCast};

pub trait CostScalar: Copy + PartialOrd + Num + NumCast + Debug + Send + Sync + 'static {}

impl<T> CostScalar for T where T: Copy + PartialOrd + Num + NumCast + Debug + Send + Sync + 'static {}

pub trait MetricScalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl<T> MetricScalar for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

#[inline]
pub(crate) fn cost_from_u64<C: CostScalar>(v: u64) -> C {
    C::from(v).expect("boundary cost representable in the cost scalar")
}

#[inline]
pub(crate) fn ratio<F: MetricScalar>(num: usize, den: usize) -> F {
    F::from_usize(num).expect("count fits") / F::from_usize(den).expect("count fits")
}
