//! Upper bounds on splitting distances of balls, and the rules that tighten them.
//!
//! Every rule only ever lowers an entry (`dbar ← min(dbar, new)`), and every change is logged.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::morphism::{inverse_jacobian, map_region, Direction, MorphismSpec};
use crate::regions::{segments, Region};
use crate::scalar::Real;

/// Dilation radii used for `d⁺(T) ≤ min_ε dbar(B(T, ε))`.
pub const DPLUS_EPSILONS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
/// Default radius spacing; divides every entry of [`DPLUS_EPSILONS`].
pub const DEFAULT_RADIUS_STEP: f64 = 0.0125;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub seq: usize,
    pub rule: String,
    pub radius: f64,
    pub old: f64,
    pub new: f64,
    pub inputs: Vec<(String, f64)>,
}

/// Tabulated upper bounds `dbar(R) ≥ d(B(R))` on a grid of radii.
#[derive(Debug, Clone)]
pub struct DistanceModel<T> {
    radii: Vec<T>,
    dbar: Vec<T>,
    log: Vec<Provenance>,
    logging: bool,
    seq: usize,
    tol: T,
}

impl<T: Real> DistanceModel<T> {
    pub fn new(radii: Vec<T>) -> Result<Self> {
        if radii.is_empty() || radii[0] <= T::zero() || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("radii must be positive and strictly increasing".into()));
        }
        let n = radii.len();
        let tol = T::lit(1e-9) * (T::one() + radii[n - 1]);
        Ok(Self { radii, dbar: vec![T::infinity(); n], log: Vec::new(), logging: true, seq: 0, tol })
    }

    /// Radii `step, 2·step, …, count·step`.
    pub fn uniform(step: T, count: usize) -> Result<Self> {
        Self::new((1..=count).map(|i| step * T::from_usize_lossy(i)).collect())
    }

    /// Radii `k·DEFAULT_RADIUS_STEP` up to `r_max`.
    pub fn with_default_step(r_max: T) -> Result<Self> {
        let step = T::lit(DEFAULT_RADIUS_STEP);
        let count = (r_max / step + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
        Self::uniform(step, count)
    }

    pub fn set_logging(&mut self, on: bool) {
        self.logging = on;
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn dbar(&self) -> &[T] {
        &self.dbar
    }

    pub fn log(&self) -> &[Provenance] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<Provenance> {
        std::mem::take(&mut self.log)
    }

    pub fn index_of(&self, r: T) -> Option<usize> {
        let i = self.radii.partition_point(|&x| x < r - self.tol);
        (i < self.radii.len() && (self.radii[i] - r).abs() <= self.tol).then_some(i)
    }

    pub fn max_bound(&self) -> T {
        self.dbar.iter().copied().fold(T::zero(), T::max)
    }

    /// Lowers entry `i` to `value` if that is an improvement; returns whether it was.
    pub fn tighten(&mut self, i: usize, value: T, rule: &str, inputs: &[(&str, T)]) -> bool {
        if !(value < self.dbar[i]) || value.is_nan() {
            return false;
        }
        let value = value.max(T::zero());
        let old = self.dbar[i];
        self.dbar[i] = value;
        self.seq += 1;
        if self.logging {
            self.log.push(Provenance {
                seq: self.seq,
                rule: rule.to_string(),
                radius: self.radii[i].to_f(),
                old: old.to_f(),
                new: value.to_f(),
                inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.to_f())).collect(),
            });
        }
        true
    }

    /// Records an externally established bound `d(B(r)) ≤ value` at a grid radius.
    pub fn seed(&mut self, r: T, value: T) -> Result<bool> {
        if !(value >= T::zero()) {
            return Err(Error::Precondition(format!("bound {value} must be non-negative")));
        }
        let i = self.index_of(r).ok_or_else(|| Error::Precondition(format!("radius {r} is not on the grid")))?;
        Ok(self.tighten(i, value, "seed", &[("value", value)]))
    }

    pub fn seed_all(&mut self, value: T) -> Result<()> {
        for i in 0..self.radii.len() {
            let r = self.radii[i];
            self.seed(r, value)?;
        }
        Ok(())
    }

    fn suffix(&self) -> Vec<T> {
        let mut s = vec![T::infinity(); self.radii.len() + 1];
        for i in (0..self.radii.len()).rev() {
            s[i] = s[i + 1].min(self.dbar[i] + self.radii[i]);
        }
        s
    }

    fn bound_with(&self, suffix: &[T], r: T) -> T {
        let i = self.radii.partition_point(|&x| x < r - self.tol);
        let v = suffix[i] - r;
        if i < self.radii.len() && (self.radii[i] - r).abs() <= self.tol {
            // exact grid hit: avoid rounding in `dbar + R − r`
            v.min(self.dbar[i])
        } else {
            v
        }
    }

    /// `d(B(r)) ≤ min_{R ≥ r} dbar(R) + (R − r)`.
    pub fn bound_at(&self, r: T) -> T {
        self.bound_with(&self.suffix(), r)
    }

    /// Upper bound on `d⁺(B(r))`: `min_ε bound_at(r + ε)` over [`DPLUS_EPSILONS`].
    pub fn upper_plus(&self, r: T) -> T {
        let s = self.suffix();
        self.upper_plus_with(&s, r)
    }

    fn upper_plus_with(&self, suffix: &[T], r: T) -> T {
        DPLUS_EPSILONS
            .iter()
            .map(|&e| self.bound_with(suffix, r + T::lit(e)))
            .fold(T::infinity(), T::min)
    }

    /// `d(B(r)) ≤ d(B(R)) + (R − r)` for every pair of grid radii `r < R`.
    pub fn propagate(&mut self) -> usize {
        let s = self.suffix();
        let mut changed = 0;
        for i in 0..self.radii.len() {
            let v = s[i + 1] - self.radii[i];
            let r = self.radii[i];
            if self.tighten(i, v, "dilation", &[("r", r)]) {
                changed += 1;
            }
        }
        changed
    }

    /// `d(B(R)) ≤ λ·d⁺(B(R/λ))` with `λ = R/r′` for every pair of grid radii.
    pub fn apply_scaling(&mut self) -> usize {
        let s = self.suffix();
        let up: Vec<T> = self.radii.iter().map(|&r| self.upper_plus_with(&s, r)).collect();
        let mut changed = 0;
        for i in 0..self.radii.len() {
            let big_r = self.radii[i];
            let best = (0..self.radii.len())
                .filter(|&j| up[j].is_finite())
                .map(|j| (big_r / self.radii[j] * up[j], j))
                .fold((T::infinity(), 0), |a, b| if b.0 < a.0 { b } else { a });
            if best.0.is_finite() {
                let lambda = big_r / self.radii[best.1];
                if self.tighten(i, best.0, "scaling", &[("lambda", lambda), ("d_plus", up[best.1])]) {
                    changed += 1;
                }
            }
        }
        changed
    }

    /// Bisection bound at every grid radius, best over the given `ε` values.
    pub fn apply_bisection(&mut self, eps: &[T], k: u32) -> Result<usize> {
        if k == 0 {
            return Err(Error::Precondition("bisection depth k must be at least 1".into()));
        }
        let s = self.suffix();
        let mut changed = 0;
        for i in 0..self.radii.len() {
            let r = self.radii[i];
            let mut best = (T::infinity(), T::zero());
            for &e in eps {
                let d = self.bound_with(&s, r + e);
                if d.is_finite() {
                    let b = bisection_bound(d, e, k);
                    if b < best.0 {
                        best = (b, e);
                    }
                }
            }
            if self.tighten(i, best.0, "bisection", &[("eps", best.1), ("k", T::from_usize_lossy(k as usize))]) {
                changed += 1;
            }
        }
        Ok(changed)
    }
}

/// `d(S) ≤ inf_{R > diam S} (R + dbar(R))`.
pub fn apply_easydistal<T: Real>(model: &DistanceModel<T>, s_diam: T) -> T {
    model
        .radii
        .iter()
        .zip(&model.dbar)
        .filter(|(&r, _)| r > s_diam + model.tol)
        .map(|(&r, &d)| r + d)
        .fold(T::infinity(), T::min)
}

/// `dbar(r + ε)/2^{2^k} + (1 − 2^{−2^k})·ε/2^{k−1}`, the `k`-fold bisection of
/// `d(B(r)) ≤ ½ d(B(r + ε)) + ε`. Uses logarithms for `k > 5`.
pub fn bisection_bound<T: Real>(d: T, eps: T, k: u32) -> T {
    let tail = eps / T::lit(2.0).powi(k as i32 - 1);
    if k <= 5 {
        let p = T::lit(2.0).powi(1 << k);
        d / p + (T::one() - T::one() / p) * tail
    } else {
        let log_p = T::lit(2.0).powi(k.min(1100) as i32) * T::lit(std::f64::consts::LN_2);
        let inv_p = (-log_p).exp();
        let head = if d == T::zero() { T::zero() } else { (d.ln() - log_p).exp() };
        head + (T::one() - inv_p) * tail
    }
}

/// Bisection bound at radius `r` from the model's bound at `r + ε`.
pub fn bisection_refine<T: Real>(model: &DistanceModel<T>, r: T, eps: T, k: u32) -> Result<T> {
    if k == 0 {
        return Err(Error::Precondition("bisection depth k must be at least 1".into()));
    }
    if !(eps > T::zero()) {
        return Err(Error::Precondition(format!("ε = {eps} must be positive")));
    }
    let d = model.bound_at(r + eps);
    if !d.is_finite() {
        return Err(Error::Precondition(format!("no finite bound at radius {}", r + eps)));
    }
    Ok(bisection_bound(d, eps, k))
}

#[derive(Debug, Clone, Serialize)]
pub struct RefineTrace {
    pub radius: f64,
    pub k: u32,
    /// `(ε_j, bound_j)` per iteration.
    pub history: Vec<(f64, f64)>,
    pub bound: f64,
    pub reached: bool,
}

/// Reapplies [`bisection_refine`] at `r` with `ε_j = eps0·2^{−j}` until the bound drops below
/// `target` or `max_iter` iterations pass. Tightens the model when `r` is a grid radius.
pub fn refine_until<T: Real>(model: &mut DistanceModel<T>, r: T, eps0: T, k: u32, target: T, max_iter: usize) -> Result<RefineTrace> {
    let idx = model.index_of(r);
    let mut history = Vec::new();
    let mut best = T::infinity();
    for j in 0..max_iter {
        let eps = eps0 / T::lit(2.0).powi(j as i32);
        let b = bisection_refine(model, r, eps, k)?;
        best = best.min(b);
        if let Some(i) = idx {
            model.tighten(i, b, "bisection", &[("eps", eps), ("k", T::from_usize_lossy(k as usize))]);
        }
        history.push((eps.to_f(), b.to_f()));
        if best < target {
            break;
        }
    }
    Ok(RefineTrace { radius: r.to_f(), k, history, bound: best.to_f(), reached: best < target })
}

#[derive(Debug, Clone, Serialize)]
pub struct DriveReport {
    pub rounds: usize,
    pub max_bound: f64,
    pub reached: bool,
    pub changes: usize,
}

/// Rounds of dilation, scaling and bisection (with `ε_j = 0.1·2^{−j}`, `j < 40`) until every
/// grid radius has `dbar < target`.
pub fn drive_all_below<T: Real>(model: &mut DistanceModel<T>, target: T, k: u32, max_rounds: usize) -> Result<DriveReport> {
    let eps: Vec<T> = (0..40).map(|j| T::lit(0.1) / T::lit(2.0).powi(j)).collect();
    let mut changes = 0;
    let mut rounds = 0;
    while rounds < max_rounds && !(model.max_bound() < target) {
        rounds += 1;
        let before = changes;
        changes += model.propagate();
        changes += model.apply_scaling();
        changes += model.apply_bisection(&eps, k)?;
        if changes == before {
            break;
        }
    }
    Ok(DriveReport { rounds, max_bound: model.max_bound().to_f(), reached: model.max_bound() < target, changes })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffeoBound {
    /// `inf{ρ : f⁻¹(B(f(S), r + 2ε)) ⊂ B(S, ρ)}` from the rasterized preimage.
    pub rho: f64,
    /// Sampled `sup ‖D(f⁻¹)‖` over `B(f(S), r) ∖ f(S)`.
    pub kappa: f64,
    /// Upper bound on `d⁺(f(S))` from the model.
    pub d_plus_image: f64,
    pub kappa_bound: f64,
    /// Radius of `f(S)` when it is known to be a ball.
    pub image_radius: Option<f64>,
    /// Upper bound on `d(B(f(S), ε))` that `r` had to exceed.
    pub image_bound: f64,
}

impl DiffeoBound {
    pub fn best(&self) -> f64 {
        self.rho.min(self.kappa_bound)
    }
}

fn enclosing_diameter<T: Real>(region: &Region<T>, center: &crate::form::Point<T>) -> T {
    T::lit(2.0) * (region.enclosing_radius(center) + region.grid().spacing())
}

/// Bounds `d(S)` through a diffeomorphism: the preimage form `ρ` and the `κ·d⁺(f(S))` form.
pub fn apply_diffeo_bound<T: Real>(model: &DistanceModel<T>, f: &MorphismSpec<T>, s: &Region<T>, eps: T, r: T) -> Result<DiffeoBound> {
    let map = match f {
        MorphismSpec::ScaledDiffeo { map, .. } => map.clone(),
        MorphismSpec::SlabInclusion { .. } => return Err(Error::Precondition("diffeo bound needs a scaled diffeomorphism".into())),
    };
    if !(eps > T::zero() && r > T::zero()) {
        return Err(Error::Precondition(format!("ε = {eps} and r = {r} must be positive")));
    }
    let grid = *s.grid();
    let fs = map_region(map.as_ref(), s, Direction::Forward)?;
    let hint = fs.ball_hint();
    let d_plus_via_diam = |extra: T| {
        let diam = enclosing_diameter(&fs, &map.center());
        DPLUS_EPSILONS
            .iter()
            .map(|&e| apply_easydistal(model, diam + T::lit(2.0 * e) + extra))
            .fold(T::infinity(), T::min)
    };
    let image_bound = match hint {
        Some(b) => model.bound_at(b.radius + eps),
        None => apply_easydistal(model, enclosing_diameter(&fs, &map.center()) + T::lit(2.0) * eps),
    };
    if !(r > image_bound) {
        return Err(Error::Precondition(format!("r = {r} must exceed the current bound {image_bound} on d(B(f(S), ε))")));
    }

    let s_dist = s.redistance()?;
    let grown = fs.offset(r + T::lit(2.0) * eps);
    let pre = map_region(map.as_ref(), &grown, Direction::Inverse)?;
    let mut rho = T::zero();
    for i in 0..grid.len() {
        if pre.sdf()[i] > T::zero() {
            rho = rho.max(-s_dist.sdf()[i]);
        }
    }
    for seg in segments(&grid, pre.sdf()) {
        for p in [seg.a, seg.b] {
            rho = rho.max(-s_dist.value_at(&p));
        }
    }

    let band = fs.offset(r);
    let mut kappa = T::zero();
    let mut sampled = 0usize;
    for i in 0..grid.len() {
        if band.sdf()[i] > T::zero() && fs.sdf()[i] <= T::zero() {
            kappa = kappa.max(inverse_jacobian(map.as_ref(), &grid, &grid.point(i))?.operator_norm());
            sampled += 1;
        }
    }
    if sampled == 0 {
        for seg in segments(&grid, fs.sdf()) {
            kappa = kappa.max(inverse_jacobian(map.as_ref(), &grid, &seg.a)?.operator_norm());
        }
    }
    let d_plus = match hint {
        Some(b) => model.upper_plus(b.radius),
        None => d_plus_via_diam(T::zero()),
    };
    let kappa_bound = if d_plus == T::zero() { T::zero() } else { kappa * d_plus };
    Ok(DiffeoBound {
        rho: rho.to_f(),
        kappa: kappa.to_f(),
        d_plus_image: d_plus.to_f(),
        kappa_bound: kappa_bound.to_f(),
        image_radius: hint.map(|b| b.radius.to_f()),
        image_bound: image_bound.to_f(),
    })
}
