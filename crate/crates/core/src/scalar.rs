use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar every numerical routine in this crate is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances are written as `f64` literals
/// and converted through [`Scalar::c`].
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    #[inline]
    fn half() -> Self {
        Self::c(0.5)
    }

    /// Converts a count (sample number, dimension) into this scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Tolerance floor that a given scalar type can actually resolve.
///
/// Returns `max(tol, factor * epsilon)`, so `f64` keeps the requested
/// tolerance while `f32` degrades to a few ulps.
#[inline]
pub fn resolvable_tol<S: Scalar>(tol: f64, factor: f64) -> S {
    let floor = S::epsilon() * S::c(factor);
    S::c(tol).max(floor)
}
