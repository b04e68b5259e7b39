//! Scalar abstraction for the numerical core.
//!
//! All field and exponent arithmetic is generic over [`Real`], which is any
//! IEEE float the FFT backend supports (`f32`, `f64`). Concrete aliases for
//! the binary64 instantiation live at the crate root.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar usable for grids, fields and spectral transforms.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + FftNum
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` literal into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy view as `f64`, for reporting and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
