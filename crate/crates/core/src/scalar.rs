//! Scalar abstraction shared by every numerical module.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// Complex numbers over a [`Real`] scalar.
pub type Complex<T> = num_complex::Complex<T>;

/// Floating point scalar the geometry, maps and pipelines are written against.
///
/// Tolerances throughout the crate are stated for `f64`; `f32` evaluates every
/// map and function but most pipeline thresholds are below its resolution.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Point coordinates as plain `f64`, used in error payloads.
pub(crate) fn point<T: Real>(z: Complex<T>) -> (f64, f64) {
    (z.re.as_f64(), z.im.as_f64())
}

/// Imaginary part of `conj(a) * b`; zero when `0`, `a`, `b` are collinear.
#[inline]
pub(crate) fn cross<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    a.re * b.im - a.im * b.re
}
