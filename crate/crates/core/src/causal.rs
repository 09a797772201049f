//! Cauchy developments of slice regions by level-set front propagation at optical speed one.
//!
//! The development slice at time `t` is the complement of what `Σ∖U` reaches by `t` at optical
//! speed at most one. With `ψ > 0` on the slice this is `ψ_t + sqrt(∇ψ · k⁻¹ ∇ψ) = 0`, marched
//! away from `t0` in both directions with an upwind Godunov scheme.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::SymForm;
use crate::geometry::StandardSpacetime;
use crate::grid::SpatialGrid;
use crate::regions::{contains, inverse_optical_field, optical_signed_distance, Margin, Region};
use crate::scalar::Real;

/// Courant number used for every development.
pub const CFL: f64 = 0.4;
/// Inflation of the sampled maximal speed when choosing the step.
pub const SPEED_SAFETY: f64 = 1.05;
const SPEED_PROBES: usize = 9;

#[derive(Debug, Clone)]
pub struct DevelopmentField<T: Real> {
    spacetime: StandardSpacetime<T>,
    t0: T,
    base: Region<T>,
    times: Vec<T>,
    fields: Vec<Vec<T>>,
    dt: T,
}

/// Area of one development slice, for reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SliceSummary {
    pub t: f64,
    pub measure: f64,
    pub max_depth: f64,
}

impl<T: Real> DevelopmentField<T> {
    pub fn spacetime(&self) -> &StandardSpacetime<T> {
        &self.spacetime
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn base(&self) -> &Region<T> {
        &self.base
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Largest step actually taken on either side.
    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn horizon(&self) -> (T, T) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// The slice at `t`, linearly interpolated between computed steps.
    pub fn slice(&self, t: T) -> Result<Region<T>> {
        let (lo, hi) = self.horizon();
        let slack = T::lit(1e-12) * (T::one() + lo.abs().max(hi.abs()));
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutsideHorizon { t: t.to_f(), lo: lo.to_f(), hi: hi.to_f() });
        }
        let k = self.times.partition_point(|&s| s <= t);
        let grid = *self.base.grid();
        if k == 0 {
            return Region::from_sdf(grid, self.fields[0].clone());
        }
        if k >= self.times.len() {
            return Region::from_sdf(grid, self.fields[self.times.len() - 1].clone());
        }
        let (ta, tb) = (self.times[k - 1], self.times[k]);
        let w = (t - ta) / (tb - ta);
        if w <= T::zero() {
            return Region::from_sdf(grid, self.fields[k - 1].clone());
        }
        let sdf = self.fields[k - 1]
            .iter()
            .zip(&self.fields[k])
            .map(|(&a, &b)| a + (b - a) * w)
            .collect();
        Region::from_sdf(grid, sdf)
    }

    pub fn summaries(&self) -> Vec<SliceSummary> {
        let grid = *self.base.grid();
        self.times
            .iter()
            .zip(&self.fields)
            .map(|(&t, f)| {
                let r = Region::from_sdf(grid, f.clone()).expect("field sized to grid");
                SliceSummary { t: t.to_f(), measure: r.measure().to_f(), max_depth: r.max_sdf().max(T::zero()).to_f() }
            })
            .collect()
    }
}

/// Development of `{t0} × U` over `horizon = (lo, hi)`, `lo ≤ t0 ≤ hi`.
pub fn develop<T: Real>(m: &StandardSpacetime<T>, t0: T, u: &Region<T>, horizon: (T, T)) -> Result<DevelopmentField<T>> {
    let (lo, hi) = horizon;
    if !(lo <= t0 && t0 <= hi) {
        return Err(Error::Precondition(format!("horizon [{lo}, {hi}] does not contain t0 = {t0}")));
    }
    u.require_nonempty("develop")?;
    let grid = *u.grid();
    let psi0 = optical_signed_distance(m, t0, u)?;
    let speed = estimate_speed(m, lo, hi)?;
    let dt_max = T::lit(CFL) * grid.spacing() / speed;

    let cached = if m.is_static() { Some(inverse_optical_field(m, t0)?) } else { None };
    let (fwd_t, fwd_f, dt_f) = march(m, &grid, &psi0, t0, hi, dt_max, cached.as_deref())?;
    let (bwd_t, bwd_f, dt_b) = march(m, &grid, &psi0, t0, lo, dt_max, cached.as_deref())?;

    let mut times: Vec<T> = bwd_t.into_iter().rev().collect();
    let mut fields: Vec<Vec<T>> = bwd_f.into_iter().rev().collect();
    times.push(t0);
    fields.push(psi0);
    times.extend(fwd_t);
    fields.extend(fwd_f);
    Ok(DevelopmentField {
        spacetime: m.clone(),
        t0,
        base: u.clone(),
        times,
        fields,
        dt: dt_f.max(dt_b),
    })
}

/// `contains(slice(t), T, m)`.
pub fn slice_contained<T: Real>(d: &DevelopmentField<T>, t: T, target: &Region<T>, m: Margin) -> Result<bool> {
    contains(&d.slice(t)?, target, m)
}

fn max_speed<T: Real>(minv: &[SymForm<T>]) -> T {
    minv.iter().map(|f| f.max_eigenvalue().sqrt()).fold(T::zero(), T::max)
}

fn estimate_speed<T: Real>(m: &StandardSpacetime<T>, lo: T, hi: T) -> Result<T> {
    let probes = if m.is_static() || hi == lo { 1 } else { SPEED_PROBES };
    let mut s = T::zero();
    for i in 0..probes {
        let t = if probes == 1 { lo } else { lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(probes - 1) };
        s = s.max(max_speed(&inverse_optical_field(m, t)?));
    }
    Ok(s * T::lit(SPEED_SAFETY))
}

type March<T> = (Vec<T>, Vec<Vec<T>>, T);

fn march<T: Real>(
    m: &StandardSpacetime<T>,
    grid: &SpatialGrid<T>,
    psi0: &[T],
    t0: T,
    t_end: T,
    dt_max: T,
    cached: Option<&[SymForm<T>]>,
) -> Result<March<T>> {
    let span = (t_end - t0).abs();
    if span == T::zero() {
        return Ok((Vec::new(), Vec::new(), T::zero()));
    }
    let steps = (span / dt_max).ceil().to_usize().unwrap_or(1).max(1);
    let dt = span / T::from_usize_lossy(steps);
    let dir = if t_end > t0 { T::one() } else { -T::one() };
    let dx = grid.spacing();
    let limit = T::lit(CFL) * dx * (T::one() + T::lit(1e-9));
    let static_speed = cached.map(max_speed);

    let mut times = Vec::with_capacity(steps);
    let mut fields: Vec<Vec<T>> = Vec::with_capacity(steps);
    let mut psi = psi0.to_vec();
    for s in 0..steps {
        let t_start = t0 + dir * dt * T::from_usize_lossy(s);
        let t_mid = t_start + dir * dt / T::lit(2.0);
        let owned;
        let (minv, speed) = match cached {
            Some(c) => (c, static_speed.unwrap_or_else(T::zero)),
            None => {
                owned = inverse_optical_field(m, t_mid)?;
                let sp = max_speed(&owned);
                (owned.as_slice(), sp)
            }
        };
        if dt * speed > limit {
            return Err(Error::CflViolation { t: t_mid.to_f(), speed: speed.to_f(), dt: dt.to_f(), dx: dx.to_f() });
        }
        psi = step(grid, &psi, minv, dt);
        times.push(if s + 1 == steps { t_end } else { t0 + dir * dt * T::from_usize_lossy(s + 1) });
        fields.push(psi.clone());
    }
    Ok((times, fields, dt))
}

fn step<T: Real>(grid: &SpatialGrid<T>, psi: &[T], minv: &[SymForm<T>], dt: T) -> Vec<T> {
    let h = grid.spacing();
    let dim = grid.dim();
    (0..psi.len())
        .into_par_iter()
        .map(|i| {
            let c = psi[i];
            let dx = (
                (c - psi[grid.neighbor(i, 0, false)]) / h,
                (psi[grid.neighbor(i, 0, true)] - c) / h,
            );
            let ham = if dim == 1 {
                godunov_1d(minv[i].xx(), dx.0, dx.1)
            } else {
                let dy = (
                    (c - psi[grid.neighbor(i, 1, false)]) / h,
                    (psi[grid.neighbor(i, 1, true)] - c) / h,
                );
                godunov_2d(&minv[i], dx, dy)
            };
            c - dt * ham
        })
        .collect()
}

fn godunov_1d<T: Real>(m11: T, a: T, b: T) -> T {
    let p = if a <= b {
        if a <= T::zero() && T::zero() <= b {
            T::zero()
        } else {
            a.abs().min(b.abs())
        }
    } else {
        a.abs().max(b.abs())
    };
    m11.sqrt() * p
}

/// Godunov Hamiltonian `ext_x ext_y sqrt(Q(x, y))`, where `ext` over the interval spanned by the
/// one-sided differences `(D⁻, D⁺)` is the min if `D⁻ ≤ D⁺` and the max otherwise.
pub(crate) fn godunov_2d<T: Real>(m: &SymForm<T>, dx: (T, T), dy: (T, T)) -> T {
    let (m11, m12, m22) = (m.xx(), m.xy(), m.yy());
    let two = T::lit(2.0);
    let q = |x: T, y: T| m11 * x * x + two * m12 * x * y + m22 * y * y;
    let (xlo, xhi) = (dx.0.min(dx.1), dx.0.max(dx.1));
    let (ylo, yhi) = (dy.0.min(dy.1), dy.0.max(dy.1));
    let clamp = |v: T, lo: T, hi: T| v.max(lo).min(hi);
    let min_x = dx.0 <= dx.1;
    let min_y = dy.0 <= dy.1;
    let val = match (min_x, min_y) {
        (true, true) => {
            if xlo <= T::zero() && T::zero() <= xhi && ylo <= T::zero() && T::zero() <= yhi {
                T::zero()
            } else {
                let mut best = T::infinity();
                for y in [ylo, yhi] {
                    let x = clamp(-m12 * y / m11, xlo, xhi);
                    best = best.min(q(x, y));
                }
                for x in [xlo, xhi] {
                    let y = clamp(-m12 * x / m22, ylo, yhi);
                    best = best.min(q(x, y));
                }
                best
            }
        }
        (false, false) => [q(xlo, ylo), q(xlo, yhi), q(xhi, ylo), q(xhi, yhi)]
            .into_iter()
            .fold(T::zero(), T::max),
        (true, false) => {
            let g = |x: T| q(x, ylo).max(q(x, yhi));
            let mut cands = vec![xlo, xhi, clamp(-m12 * ylo / m11, xlo, xhi), clamp(-m12 * yhi / m11, xlo, xhi)];
            if m12 != T::zero() {
                cands.push(clamp(-m22 * (ylo + yhi) / (two * m12), xlo, xhi));
            }
            cands.into_iter().map(g).fold(T::infinity(), T::min)
        }
        (false, true) => {
            let g = |x: T| q(x, clamp(-m12 * x / m22, ylo, yhi));
            g(xlo).max(g(xhi))
        }
    };
    val.max(T::zero()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(m: &SymForm<f64>, dx: (f64, f64), dy: (f64, f64)) -> f64 {
        let n = 400;
        let lin = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / n as f64;
        let mut outer: Option<f64> = None;
        for i in 0..=n {
            let x = lin(dx.0, dx.1, i);
            let mut inner: Option<f64> = None;
            for j in 0..=n {
                let y = lin(dy.0, dy.1, j);
                let v = m.quad(&[x, y]);
                inner = Some(match inner {
                    None => v,
                    Some(w) if dy.0 <= dy.1 => w.min(v),
                    Some(w) => w.max(v),
                });
            }
            let v = inner.unwrap();
            outer = Some(match outer {
                None => v,
                Some(w) if dx.0 <= dx.1 => w.min(v),
                Some(w) => w.max(v),
            });
        }
        outer.unwrap().sqrt()
    }

    #[test]
    fn godunov_matches_brute_force_extrema() {
        let m = SymForm::new(1.3, 0.4, 0.7);
        let vals = [-1.2, -0.3, 0.2, 0.9];
        for &a in &vals {
            for &b in &vals {
                for &c in &vals {
                    for &d in &vals {
                        let got = godunov_2d(&m, (a, b), (c, d));
                        let want = brute(&m, (a, b), (c, d));
                        assert!((got * got - want * want).abs() < 1e-2, "{a} {b} {c} {d}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn minkowski_slice_shrinks_at_unit_speed() {
        let g = SpatialGrid::new(2, 8.0, 128).unwrap();
        let m = StandardSpacetime::minkowski(g);
        let u = Region::ball(g, g.center(), 1.0);
        let d = develop(&m, 0.0, &u, (-0.6, 0.6)).unwrap();
        let want = Region::ball(g, g.center(), 0.5);
        for t in [0.5, -0.5] {
            let h = crate::regions::hausdorff(&d.slice(t).unwrap(), &want).unwrap();
            assert!(h <= 2.0 * g.spacing(), "t={t}: {h}");
        }
        assert!(d.slice(0.7).is_err());
    }

    #[test]
    fn one_dimensional_interval_shrinks() {
        let g = SpatialGrid::new(1, 4.0, 256).unwrap();
        let m = StandardSpacetime::ultrastatic(g, 4.0);
        let u = Region::ball(g, g.center(), 1.0);
        let d = develop(&m, 0.0, &u, (0.0, 1.0)).unwrap();
        let s = d.slice(1.0).unwrap();
        let want = Region::ball(g, g.center(), 0.5);
        assert!(crate::regions::hausdorff(&s, &want).unwrap() <= 2.0 * g.spacing());
    }
}
