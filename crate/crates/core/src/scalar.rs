//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point type the engine can run on.
///
/// Implemented for `f32` and `f64`. The default tolerances differ because
/// `1e-9` is below single-precision resolution.
pub trait Scalar:
    'static
    + Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
{
    /// Feasibility / dominance tolerance used when none is given.
    fn default_tolerance() -> Self;

    /// Relative cut-off for truncating Poisson tail sums.
    fn default_summation_tolerance() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f64 {
    fn default_tolerance() -> Self {
        1e-9
    }

    fn default_summation_tolerance() -> Self {
        1e-15
    }
}

impl Scalar for f32 {
    fn default_tolerance() -> Self {
        1e-5
    }

    fn default_summation_tolerance() -> Self {
        1e-7
    }
}
