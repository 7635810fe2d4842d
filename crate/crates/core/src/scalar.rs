//! Scalar types the simulator can run on.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar underlying all amplitudes.
///
/// The two tolerances are expressed in `f64` so callers can compare against
/// them without caring about the concrete precision.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Amplitudes with a smaller modulus are dropped from a state.
    const PRUNE: f64;
    /// Largest accepted deviation of the squared norm from one.
    const NORM_TOL: f64;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f64 {
    const PRUNE: f64 = 1e-12;
    const NORM_TOL: f64 = 1e-9;
}

impl Real for f32 {
    const PRUNE: f64 = 1e-6;
    const NORM_TOL: f64 = 1e-4;
}

/// Builds a complex scalar from two `f64` parts.
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}
