//! Scalar abstraction for the numerical substrate.

use std::fmt::{Debug, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable by the linear-algebra layer: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + LowerExp + Debug + Send + Sync + 'static
{
    /// Machine epsilon of the type, widened to `f64`.
    const EPS: f64;

    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    /// A comparison tolerance: `base`, but never tighter than a few hundred ulps of the type.
    #[inline]
    fn tol(base: f64) -> Self {
        Self::lit(base.max(256.0 * Self::EPS))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }
}

impl Real for f32 {
    const EPS: f64 = f32::EPSILON as f64;
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
}
