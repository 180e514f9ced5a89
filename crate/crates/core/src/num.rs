//! Scalar abstraction for the floating-point kernels.
//!
//! The value model itself is dynamically typed (`float64` cells are always
//! `f64`), but the numeric kernels are written against [`Real`] so they can be
//! exercised at other precisions.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Real:
    'static + Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        // Every `Real` is a float type; `from_f64` only fails for integer targets.
        Self::from_f64(x).expect("float literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}
