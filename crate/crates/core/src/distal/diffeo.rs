//! The radial diffeomorphism `f(x) = c₀ + (ρ + χ(ρ))·x̂` built from a bump profile.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::form::{Mat2, Point};
use crate::grid::SpatialGrid;
use crate::morphism::{MorphismSpec, SpatialMap};
use crate::regions::BallHint;
use crate::scalar::Real;

use super::bump::RadialBump;

const STRETCH_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy)]
pub struct RadialDiffeo<T> {
    pub dim: usize,
    pub center: Point<T>,
    pub chi: RadialBump<T>,
}

impl<T: Real> RadialDiffeo<T> {
    pub fn new(dim: usize, center: Point<T>, chi: RadialBump<T>) -> Self {
        Self { dim, center, chi }
    }

    /// `ρ + χ(ρ)`.
    pub fn radial(&self, rho: T) -> T {
        rho + self.chi.value(rho)
    }

    /// Solves `ρ + χ(ρ) = target` (Newton, safeguarded by bisection on `[target − max χ, target]`).
    pub fn radial_inverse(&self, target: T) -> Result<T> {
        if target <= T::zero() {
            return Ok(T::zero());
        }
        let (mut lo, mut hi) = ((target - self.chi.rho2 - self.chi.ell).max(T::zero()), target);
        let mut rho = target;
        let tol = T::lit(1e-15) * (T::one() + target);
        for _ in 0..200 {
            let f = self.radial(rho) - target;
            if f.abs() <= tol {
                return Ok(rho);
            }
            if f > T::zero() {
                hi = rho;
            } else {
                lo = rho;
            }
            let slope = T::one() + self.chi.derivative(rho);
            let newton = rho - f / slope;
            rho = if slope > T::zero() && newton > lo && newton < hi { newton } else { (lo + hi) / T::lit(2.0) };
            if hi - lo <= tol {
                return Ok(rho);
            }
        }
        Err(Error::Construction(format!("radial inverse did not converge for {target}")))
    }

    /// `sup ‖Df‖`.
    pub fn stretch(&self) -> T {
        self.chi.max_stretch(STRETCH_SAMPLES)
    }
}

fn norm<T: Real>(dim: usize, d: &Point<T>) -> T {
    if dim == 1 {
        d[0].abs()
    } else {
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }
}

impl<T: Real> SpatialMap<T> for RadialDiffeo<T> {
    fn describe(&self) -> String {
        format!(
            "radial(r*={}, rho1={}, rho2={}, support={})",
            self.chi.rstar, self.chi.rho1, self.chi.rho2, self.chi.support
        )
    }

    fn center(&self) -> Point<T> {
        self.center
    }

    fn forward_local(&self, d: &Point<T>) -> Point<T> {
        let rho = norm(self.dim, d);
        if rho == T::zero() {
            return *d;
        }
        let s = self.radial(rho) / rho;
        [d[0] * s, d[1] * s]
    }

    fn inverse_local(&self, e: &Point<T>) -> Result<Point<T>> {
        let r = norm(self.dim, e);
        if r == T::zero() {
            return Ok(*e);
        }
        let s = self.radial_inverse(r)? / r;
        Ok([e[0] * s, e[1] * s])
    }

    /// `a·x̂x̂ᵀ + b·(I − x̂x̂ᵀ)` with `a = 1 + χ′`, `b = 1 + χ/ρ`.
    fn jacobian_local(&self, d: &Point<T>) -> Mat2<T> {
        let rho = norm(self.dim, d);
        let a = T::one() + self.chi.derivative(rho);
        if self.dim == 1 {
            return Mat2::new1(a);
        }
        if rho == T::zero() {
            return Mat2::scaled_identity(2, a);
        }
        let b = T::one() + self.chi.value(rho) / rho;
        let (ux, uy) = (d[0] / rho, d[1] / rho);
        let diff = a - b;
        Mat2::new([[b + diff * ux * ux, diff * ux * uy], [diff * ux * uy, b + diff * uy * uy]])
    }

    fn max_stretch(&self) -> Option<T> {
        Some(self.stretch())
    }

    fn image_ball(&self, ball: &BallHint<T>) -> Option<BallHint<T>> {
        (ball.center == self.center).then(|| BallHint { center: self.center, radius: self.radial(ball.radius) })
    }

    fn preimage_ball(&self, ball: &BallHint<T>) -> Option<BallHint<T>> {
        if ball.center != self.center {
            return None;
        }
        self.radial_inverse(ball.radius).ok().map(|radius| BallHint { center: self.center, radius })
    }
}

/// Scaled diffeomorphism with the radial map of `chi` about `center`. The time scale defaults to
/// `(1 − 10⁻⁶)/sup‖Df‖`, the largest admissible value up to a rounding guard.
pub fn radial_diffeo<T: Real>(chi: RadialBump<T>, center: Point<T>, grid: &SpatialGrid<T>) -> Result<MorphismSpec<T>> {
    let map = RadialDiffeo::new(grid.dim(), center, chi);
    let c = (T::one() - T::lit(1e-6)) / map.stretch();
    radial_diffeo_with_c(chi, center, c, grid)
}

pub fn radial_diffeo_with_c<T: Real>(chi: RadialBump<T>, center: Point<T>, c: T, grid: &SpatialGrid<T>) -> Result<MorphismSpec<T>> {
    if !chi.is_zero() {
        chi.validate(super::bump::VALIDATION_SAMPLES)?;
    }
    let map = RadialDiffeo::new(grid.dim(), center, chi);
    MorphismSpec::scaled_diffeo(c, Arc::new(map), grid)
}
