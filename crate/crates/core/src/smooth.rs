//! C² quintic step functions used for time profiles and radial blends.

use crate::scalar::Real;

/// Quintic smoothstep on [0, 1]: value 0 → 1 with vanishing first and second derivatives at both ends.
#[inline]
pub fn smoothstep<T: Real>(u: T) -> T {
    if u <= T::zero() {
        return T::zero();
    }
    if u >= T::one() {
        return T::one();
    }
    u * u * u * (u * (u * T::lit(6.0) - T::lit(15.0)) + T::lit(10.0))
}

#[inline]
pub fn smoothstep_derivative<T: Real>(u: T) -> T {
    if u <= T::zero() || u >= T::one() {
        return T::zero();
    }
    let w = u * (T::one() - u);
    T::lit(30.0) * w * w
}

/// Antiderivative of [`smoothstep`] on [0, 1], zero at 0 and 1/2 at 1.
#[inline]
pub fn smoothstep_integral<T: Real>(u: T) -> T {
    let u = u.max(T::zero()).min(T::one());
    let u4 = u * u * u * u;
    u4 * (u * (u - T::lit(3.0)) + T::lit(2.5))
}

/// Smooth step in time: 0 for `t <= start`, 1 for `t >= end`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SmoothStep<T> {
    pub start: T,
    pub end: T,
}

impl<T: Real> SmoothStep<T> {
    pub fn new(start: T, end: T) -> Self {
        debug_assert!(start < end);
        Self { start, end }
    }

    #[inline]
    pub fn value(&self, t: T) -> T {
        smoothstep((t - self.start) / (self.end - self.start))
    }

    #[inline]
    pub fn derivative(&self, t: T) -> T {
        let len = self.end - self.start;
        smoothstep_derivative((t - self.start) / len) / len
    }
}
