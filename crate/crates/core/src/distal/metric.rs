//! The inflationary metric `c^{2φ}(dt⊗dt − c⁻²φ h − (1 − φ) δ)` with `f*h = δ`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{Point, SymForm};
use crate::geometry::{FormSampler, ScalarSampler, StandardSpacetime};
use crate::grid::SpatialGrid;
use crate::morphism::{inverse_jacobian, MorphismSpec, SpatialMap};
use crate::scalar::Real;
use crate::smooth::SmoothStep;

/// `φ ≡ 1` for `t ≤ 0`, `φ ≡ 0` for `t ≥ t*`, quintic in between.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistalProfile<T> {
    pub tstar: T,
}

impl<T: Real> DistalProfile<T> {
    pub fn new(tstar: T) -> Result<Self> {
        if tstar > T::zero() {
            Ok(Self { tstar })
        } else {
            Err(Error::Construction(format!("profile end t* = {tstar} must be positive")))
        }
    }

    pub fn value(&self, t: T) -> T {
        T::one() - SmoothStep::new(T::zero(), self.tstar).value(t)
    }
}

/// `h` at `y`: the form `w ↦ ‖D(f⁻¹)(y) w‖²`.
pub fn pushed_metric<T: Real>(map: &dyn SpatialMap<T>, grid: &SpatialGrid<T>, y: &Point<T>) -> Result<SymForm<T>> {
    Ok(inverse_jacobian(map, grid, y)?.gram())
}

fn parts<T: Real>(f: &MorphismSpec<T>) -> Result<(T, Arc<dyn SpatialMap<T>>)> {
    match f {
        MorphismSpec::ScaledDiffeo { c, map } => Ok((*c, map.clone())),
        MorphismSpec::SlabInclusion { .. } => Err(Error::Precondition("distal metric needs a scaled diffeomorphism".into())),
    }
}

/// Standard-form spacetime with `β = c^{2φ}` and optical form `k = c⁻²φ h + (1 − φ) δ`.
pub fn distal_metric<T: Real>(f: &MorphismSpec<T>, profile: DistalProfile<T>, grid: &SpatialGrid<T>) -> Result<StandardSpacetime<T>> {
    let (c, map) = parts(f)?;
    let excess = f.contraction_excess(grid);
    if excess > T::lit(1e-12) {
        return Err(Error::Construction(format!("c = {c} too large: c·‖Df‖ exceeds 1 by {excess}")));
    }
    let two_ln_c = T::lit(2.0) * c.ln();
    let beta: ScalarSampler<T> = Arc::new(move |t, _| Ok((two_ln_c * profile.value(t)).exp()));
    let dim = grid.dim();
    let g = *grid;
    let inv_c2 = T::one() / (c * c);
    let h: FormSampler<T> = Arc::new(move |t, y| {
        let phi = profile.value(t);
        let k = pushed_metric(map.as_ref(), &g, y)? * (inv_c2 * phi) + SymForm::identity(dim) * (T::one() - phi);
        Ok(k * (two_ln_c * phi).exp())
    });
    Ok(StandardSpacetime::new(*grid, beta, h).with_label(format!("distal({:?}, t*={})", f, profile.tstar)))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeCertificate {
    pub samples: usize,
    /// Smallest eigenvalue of `k_g − δ`.
    pub min_eigenvalue: f64,
    pub pass: bool,
}

/// Samples `k_g − δ ⪰ 0` (cones of `g` inside Minkowski cones) over `t ∈ [−t*/4, 5t*/4]`.
pub fn distal_cone_certificate<T: Real>(g: &StandardSpacetime<T>, tstar: T, samples: usize, seed: u64, tol: T) -> Result<ConeCertificate> {
    let grid = *g.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(T, Point<T>)> = (0..samples)
        .map(|_| {
            let t = tstar * T::lit(rng.gen_range(-0.25..1.25));
            let mut x = [T::zero(); 2];
            for xi in x.iter_mut().take(grid.dim()) {
                *xi = grid.period() * T::lit(rng.gen_range(0.0..1.0));
            }
            (t, x)
        })
        .collect();
    let min = pts
        .par_iter()
        .map(|(t, x)| Ok((g.optical(*t, x)?.form() - SymForm::identity(grid.dim())).min_eigenvalue()))
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::infinity(), T::min);
    Ok(ConeCertificate { samples, min_eigenvalue: min.to_f(), pass: min >= -tol })
}

/// `max c·‖Df u‖/‖u‖ − 1` over seeded random points and directions.
pub fn sampled_contraction_excess<T: Real>(f: &MorphismSpec<T>, grid: &SpatialGrid<T>, samples: usize, seed: u64) -> Result<T> {
    let (c, map) = parts(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::neg_infinity();
    for _ in 0..samples {
        let mut x = [T::zero(); 2];
        for xi in x.iter_mut().take(grid.dim()) {
            *xi = grid.period() * T::lit(rng.gen_range(0.0..1.0));
        }
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let u = if grid.dim() == 1 { [T::one(), T::zero()] } else { [T::lit(a.cos()), T::lit(a.sin())] };
        let d = grid.displacement(&map.center(), &x);
        let v = map.jacobian_local(&d).mul_vec(&u);
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        worst = worst.max(c * n - T::one());
    }
    Ok(worst)
}
