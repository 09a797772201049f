//! Radial profile `χ` on `[0, ∞)`: zero, then a C² rise onto the line `ρ − r*`, then a C² decay
//! back to zero with slope bounded below by `−DECAY_SLOPE`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::smooth::{smoothstep, smoothstep_derivative, smoothstep_integral};

/// Steepest descent of the decay section.
pub const DECAY_SLOPE: f64 = 0.9;
/// Length of each slope transition in the decay section, as a fraction of `rho2`.
pub const TRANSITION_FRACTION: f64 = 0.25;
pub const VALIDATION_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialBump<T> {
    pub rstar: T,
    pub rho1: T,
    pub rho2: T,
    pub support: T,
    /// Length of each slope transition.
    pub ell: T,
    /// Length of the constant-slope stretch.
    pub ell2: T,
    /// `χ ≡ 0` beyond this radius.
    pub end: T,
    pub min_sampled_slope: T,
}

// rise: χ = ρ₁·P(u/ρ₁), P(v) = 6v³ − 8v⁴ + 3v⁵ (P(1) = P'(1) = 1, P''(0) = P''(1) = 0)
fn rise<T: Real>(v: T) -> T {
    let v3 = v * v * v;
    v3 * (T::lit(6.0) + v * (T::lit(-8.0) + T::lit(3.0) * v))
}

fn rise_derivative<T: Real>(v: T) -> T {
    let v2 = v * v;
    v2 * (T::lit(18.0) + v * (T::lit(-32.0) + T::lit(15.0) * v))
}

impl<T: Real> RadialBump<T> {
    pub fn build(rstar: T, rho1: T, rho2: T, support: T) -> Result<Self> {
        if !(rstar >= T::zero() && T::zero() < rho1 && rho1 < rho2 && rho2 < support - rstar) {
            return Err(Error::Construction(format!(
                "need 0 ≤ r* and 0 < ρ₁ < ρ₂ < support − r*, got r*={rstar}, ρ₁={rho1}, ρ₂={rho2}, support={support}"
            )));
        }
        let s = T::lit(DECAY_SLOPE);
        let ell = T::lit(TRANSITION_FRACTION) * rho2;
        let ell2 = (rho2 + ell * (T::one() - T::lit(2.0) * s) / T::lit(2.0)) / s;
        let end = rstar + rho2 + T::lit(2.0) * ell + ell2;
        if ell2 < T::zero() || end > support {
            return Err(Error::Construction(format!(
                "decay with slope ≥ −{DECAY_SLOPE} needs χ to vanish by {end}, beyond support {support}"
            )));
        }
        let mut bump = Self { rstar, rho1, rho2, support, ell, ell2, end, min_sampled_slope: T::zero() };
        bump.min_sampled_slope = bump.validate(VALIDATION_SAMPLES)?;
        Ok(bump)
    }

    /// `χ ≡ 0`.
    pub fn zero() -> Self {
        let z = T::zero();
        Self { rstar: z, rho1: z, rho2: z, support: z, ell: z, ell2: z, end: z, min_sampled_slope: z }
    }

    pub fn is_zero(&self) -> bool {
        self.end == T::zero()
    }

    pub fn value(&self, rho: T) -> T {
        if self.is_zero() {
            return T::zero();
        }
        let u = rho - self.rstar;
        if u <= T::zero() || rho >= self.end {
            return T::zero();
        }
        if u < self.rho1 {
            return self.rho1 * rise(u / self.rho1);
        }
        if u <= self.rho2 {
            return u;
        }
        let s = T::lit(DECAY_SLOPE);
        let one_s = T::one() + s;
        let w = u - self.rho2;
        let (ell, ell2) = (self.ell, self.ell2);
        if w < ell {
            let v = w / ell;
            return self.rho2 + w - one_s * ell * smoothstep_integral(v);
        }
        let after_first = self.rho2 + ell * (T::one() - one_s / T::lit(2.0));
        if w < ell + ell2 {
            return after_first - s * (w - ell);
        }
        let v = (w - ell - ell2) / ell;
        let x = after_first - s * ell2;
        (x - s * ell * v + s * ell * smoothstep_integral(v)).max(T::zero())
    }

    pub fn derivative(&self, rho: T) -> T {
        if self.is_zero() {
            return T::zero();
        }
        let u = rho - self.rstar;
        if u <= T::zero() || rho >= self.end {
            return T::zero();
        }
        if u < self.rho1 {
            return rise_derivative(u / self.rho1);
        }
        if u <= self.rho2 {
            return T::one();
        }
        let s = T::lit(DECAY_SLOPE);
        let w = u - self.rho2;
        let (ell, ell2) = (self.ell, self.ell2);
        if w < ell {
            return T::one() - (T::one() + s) * smoothstep(w / ell);
        }
        if w < ell + ell2 {
            return -s;
        }
        -s + s * smoothstep((w - ell - ell2) / ell)
    }

    /// Second derivative, used only to confirm C² joins.
    pub fn second_derivative(&self, rho: T) -> T {
        if self.is_zero() {
            return T::zero();
        }
        let u = rho - self.rstar;
        if u <= T::zero() || rho >= self.end {
            return T::zero();
        }
        if u < self.rho1 {
            let v = u / self.rho1;
            let d = v * (T::lit(36.0) + v * (T::lit(-96.0) + T::lit(60.0) * v));
            return d / self.rho1;
        }
        if u <= self.rho2 {
            return T::zero();
        }
        let s = T::lit(DECAY_SLOPE);
        let w = u - self.rho2;
        let (ell, ell2) = (self.ell, self.ell2);
        if w < ell {
            return -(T::one() + s) * smoothstep_derivative(w / ell) / ell;
        }
        if w < ell + ell2 {
            return T::zero();
        }
        s * smoothstep_derivative((w - ell - ell2) / ell) / ell
    }

    /// Dense check of the invariants on `[0, support]`; returns the smallest sampled `χ′`.
    pub fn validate(&self, samples: usize) -> Result<T> {
        let mut min_slope = T::infinity();
        for i in 0..=samples {
            let rho = self.support * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
            let d = self.derivative(rho);
            min_slope = min_slope.min(d);
            if d <= -T::one() {
                return Err(Error::Construction(format!("χ′({rho}) = {d} ≤ −1")));
            }
            let v = self.value(rho);
            if v < T::zero() {
                return Err(Error::Construction(format!("χ({rho}) = {v} < 0")));
            }
            let u = rho - self.rstar;
            if u <= T::zero() && v != T::zero() {
                return Err(Error::Construction(format!("χ({rho}) = {v} inside r*")));
            }
            if u >= self.rho1 && u <= self.rho2 && v != u {
                return Err(Error::Construction(format!("χ({rho}) = {v} off the linear section")));
            }
        }
        if self.value(self.support) != T::zero() {
            return Err(Error::Construction("χ does not vanish at the support radius".into()));
        }
        Ok(min_slope)
    }

    /// `sup_ρ max(1 + χ′(ρ), 1 + χ(ρ)/ρ)`: the largest stretch of the radial map.
    pub fn max_stretch(&self, samples: usize) -> T {
        if self.is_zero() {
            return T::one();
        }
        (1..=samples)
            .map(|i| {
                let rho = self.end * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
                (T::one() + self.derivative(rho)).max(T::one() + self.value(rho) / rho)
            })
            .fold(T::one(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_values() {
        let b = RadialBump::build(1.0_f64, 0.5, 1.5, 6.0).unwrap();
        assert_eq!(b.value(2.0), 1.0);
        assert_eq!(b.value(0.8), 0.0);
        assert!(b.min_sampled_slope >= -DECAY_SLOPE - 1e-12);
        assert_eq!(b.value(6.0), 0.0);
    }

    #[test]
    fn infeasible_geometry_is_rejected() {
        assert!(RadialBump::build(1.0_f64, 0.5, 1.5, 4.0).is_err());
        assert!(RadialBump::build(1.0_f64, 1.5, 0.5, 6.0).is_err());
    }

    #[test]
    fn joins_are_c2() {
        let b = RadialBump::build(1.0_f64, 0.5, 1.5, 6.0).unwrap();
        let e = 1e-9;
        let joins = [b.rstar, b.rstar + b.rho1, b.rstar + b.rho2, b.rstar + b.rho2 + b.ell, b.rstar + b.rho2 + b.ell + b.ell2, b.end];
        for &j in &joins {
            assert!((b.value(j - e) - b.value(j + e)).abs() < 1e-8, "value jump at {j}");
            assert!((b.derivative(j - e) - b.derivative(j + e)).abs() < 1e-7, "slope jump at {j}");
            assert!((b.second_derivative(j - e) - b.second_derivative(j + e)).abs() < 1e-6, "curvature jump at {j}");
        }
    }

    #[test]
    fn derivative_integrates_to_value() {
        let b = RadialBump::build(0.5_f64, 0.3, 1.0, 5.0).unwrap();
        let n = 200_000;
        let h = 5.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * h;
            acc += b.derivative(r) * h;
            if i % 20_000 == 0 {
                assert!((acc - b.value(r + 0.5 * h)).abs() < 1e-6);
            }
        }
        assert!(acc.abs() < 1e-6);
    }
}
