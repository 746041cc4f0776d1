//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the simulator is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count into the scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn deg(self) -> Self {
        self.to_degrees()
    }

    #[inline]
    fn rad(self) -> Self {
        self.to_radians()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Speed of light in micrometers per picosecond.
pub const SPEED_OF_LIGHT_UM_PER_PS: f64 = 299.792_458;

/// Normalized `sin(x)/x` with the removable singularity handled by a series.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}
