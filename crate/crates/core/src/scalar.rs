//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable throughout the simulator.
///
/// Implemented for `f32` and `f64`. All physics is written against this
/// trait; `f64` is the type the sweep front end and the tolerance defaults
/// are calibrated for.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal or constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self {
        Self::default_epsilon()
    }

    /// `max(reference, factor * eps)`: a tolerance that is the stated f64
    /// value where f64 can meet it, and a precision-limited floor otherwise.
    fn tolerance(reference: f64, factor: f64) -> Self {
        let floor = Self::eps() * Self::lit(factor);
        let r = Self::lit(reference);
        if floor > r {
            floor
        } else {
            r
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
