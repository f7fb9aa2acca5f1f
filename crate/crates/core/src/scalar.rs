//! Scalar abstraction shared by the numeric core.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the benchmarks, geometry and GA operators are written against.
///
/// Implemented for `f32` and `f64`. Experiment records and the service are pinned to `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Total order on fitness values for minimisation; NaN sorts after everything.
pub(crate) fn cmp_fitness<T: Scalar>(a: T, b: T) -> std::cmp::Ordering {
    match a.partial_cmp(&b) {
        Some(o) => o,
        None => a.is_nan().cmp(&b.is_nan()),
    }
}
