//! Floating-point abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the geometry, flows and finite-difference solver are generic over.
///
/// Implemented for `f32` and `f64`. The tolerance hooks let predicates scale
/// with the precision; `f64` is the reference precision for the pipeline.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    /// Absolute tolerance used to merge critical levels.
    fn dedup_tolerance() -> Self;
    /// Increment used to push an extraction level off a critical value.
    fn level_nudge() -> Self;
    /// Curvatures below this magnitude are reported as exactly zero.
    fn curvature_floor() -> Self;

    /// Converts an `f64` literal; every `f64` is representable (possibly rounded).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts to every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f64 {
    fn dedup_tolerance() -> Self {
        1e-9
    }
    fn level_nudge() -> Self {
        1e-6
    }
    fn curvature_floor() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn dedup_tolerance() -> Self {
        1e-5
    }
    fn level_nudge() -> Self {
        // 1e-6 is below the f32 spacing of typical 8-bit gray values.
        1e-3
    }
    fn curvature_floor() -> Self {
        1e-6
    }
}
