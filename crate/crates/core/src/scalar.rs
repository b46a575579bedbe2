//! Real-number abstraction for the state buffer and everything that reads it.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type a brain computes with: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + Sum
    + Default
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Tolerance for a probability row to count as normalized.
    const ROW_TOLERANCE: f64;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 fits every scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {
    const ROW_TOLERANCE: f64 = 1e-5;
}

impl Scalar for f64 {
    const ROW_TOLERANCE: f64 = 1e-9;
}
