//! Regular Cauchy pairs, the preorder between them, the light-speed window estimate, and the
//! stepping construction that produces ordered pairs from nested regions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::causal::develop;
use crate::error::{Error, Result};
use crate::geometry::StandardSpacetime;
use crate::morphism::{map_region, Direction, MorphismSpec};
use crate::regions::{
    contains, contains_strict, containment_margin, field_gap, optical_ball, optical_signed_distance, same_grid,
    Margin, Region,
};
use crate::scalar::Real;

/// Margin (cells) at which pair invariants and ordering checks are decided.
pub const PAIR_MARGIN: f64 = 2.0;
/// Number of time samples across `[t* − δ, t* + δ]` when estimating `K`.
pub const K_TIME_SAMPLES: usize = 33;
pub const K_SAFETY: f64 = 1.05;

/// `(S, T)_t`: `inner` is `S`, `outer` is `T`.
#[derive(Debug, Clone)]
pub struct CauchyPair<T> {
    pub t: T,
    pub inner: Region<T>,
    pub outer: Region<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Irregularity {
    EmptyInner,
    InnerNotInsideOuter,
    EmptyExterior,
    GridMismatch,
}

impl std::fmt::Display for Irregularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Irregularity::EmptyInner => "S is empty",
            Irregularity::InnerNotInsideOuter => "closure of S not inside T",
            Irregularity::EmptyExterior => "T has empty exterior",
            Irregularity::GridMismatch => "S and T live on different grids",
        };
        f.write_str(s)
    }
}

impl<T: Real> CauchyPair<T> {
    pub fn new(t: T, inner: Region<T>, outer: Region<T>) -> Self {
        Self { t, inner, outer }
    }

    /// Like [`CauchyPair::new`], rejecting pairs that are not regular.
    pub fn regular(t: T, inner: Region<T>, outer: Region<T>) -> Result<Self> {
        let p = Self::new(t, inner, outer);
        match regularity(&p) {
            None => Ok(p),
            Some(why) => Err(Error::Precondition(format!("pair at t={t} is not regular: {why}"))),
        }
    }

    pub fn at_time(&self, t: T) -> Self {
        Self { t, ..self.clone() }
    }
}

/// The first failed regularity invariant, or `None` for a regular pair.
pub fn regularity<T: Real>(p: &CauchyPair<T>) -> Option<Irregularity> {
    if same_grid(&p.inner, &p.outer).is_err() {
        return Some(Irregularity::GridMismatch);
    }
    let m = Margin::cells(PAIR_MARGIN).expect("constant margin");
    if p.inner.is_empty() {
        Some(Irregularity::EmptyInner)
    } else if !contains_strict(&p.outer, &p.inner, m).unwrap_or(false) {
        Some(Irregularity::InnerNotInsideOuter)
    } else if !p.outer.has_exterior(m) {
        Some(Irregularity::EmptyExterior)
    } else {
        None
    }
}

pub fn is_regular<T: Real>(p: &CauchyPair<T>) -> bool {
    regularity(p).is_none()
}

/// Outcome of one ordering check `p1 ≺ p2`. Margins are signed cell counts by which each
/// target sits inside its development slice.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Precedence {
    pub t1: f64,
    pub t2: f64,
    pub s_margin: f64,
    pub t_margin: f64,
    pub s_holds: bool,
    pub t_holds: bool,
}

impl Precedence {
    pub fn holds(&self) -> bool {
        self.s_holds && self.t_holds
    }

    pub fn worst_margin(&self) -> f64 {
        self.s_margin.min(self.t_margin)
    }
}

/// `S₂ ⊂ D(S₁)` at `t₂` and `T₁ ⊂ D(T₂)` at `t₁`, decided at margin `m`.
pub fn precedence<T: Real>(p1: &CauchyPair<T>, p2: &CauchyPair<T>, m: &StandardSpacetime<T>, margin: Margin) -> Result<Precedence> {
    for p in [p1, p2] {
        if let Some(why) = regularity(p) {
            return Err(Error::Precondition(format!("pair at t={} is not regular: {why}", p.t)));
        }
    }
    let span = (p1.t.min(p2.t), p1.t.max(p2.t));
    let (ds, dt) = rayon::join(|| develop(m, p1.t, &p1.inner, span), || develop(m, p2.t, &p2.outer, span));
    let s_slice = ds?.slice(p2.t)?;
    let t_slice = dt?.slice(p1.t)?;
    Ok(Precedence {
        t1: p1.t.to_f(),
        t2: p2.t.to_f(),
        s_margin: containment_margin(&s_slice, &p2.inner)?.to_f(),
        t_margin: containment_margin(&t_slice, &p1.outer)?.to_f(),
        s_holds: contains(&s_slice, &p2.inner, margin)?,
        t_holds: contains(&t_slice, &p1.outer, margin)?,
    })
}

/// `p1 ≺ p2` in `m`, decided at margin `margin`.
pub fn precedes<T: Real>(p1: &CauchyPair<T>, p2: &CauchyPair<T>, m: &StandardSpacetime<T>, margin: Margin) -> Result<bool> {
    Ok(precedence(p1, p2, m, margin)?.holds())
}

/// The worst signed margin (cells) of `p1 ≺ p2`.
pub fn precedes_margin<T: Real>(p1: &CauchyPair<T>, p2: &CauchyPair<T>, m: &StandardSpacetime<T>) -> Result<f64> {
    Ok(precedence(p1, p2, m, Margin::ZERO)?.worst_margin())
}

/// Light-speed constant `K` and time window `ε = δ / (2√K)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LightspeedEstimate {
    pub tstar: f64,
    pub delta: f64,
    /// Sampled supremum of the generalized eigenvalues, before clamping and safety.
    pub k_raw: f64,
    /// `max(k_raw, 1) · 1.05` over `τ ∈ [t* − δ, t* + δ]`.
    pub k: f64,
    /// The same constant with `τ` restricted to `[t*, t* + δ]`.
    pub k_forward_only: f64,
    pub eps: f64,
    pub time_samples: usize,
    pub node_samples: usize,
}

pub fn lightspeed_epsilon<T: Real>(m: &StandardSpacetime<T>, target: &Region<T>, delta: T, tstar: T) -> Result<LightspeedEstimate> {
    if !(delta > T::zero()) {
        return Err(Error::Precondition(format!("δ = {delta} must be positive")));
    }
    let ball = optical_ball(m, tstar, target, delta)?;
    let margin = Margin::cells(PAIR_MARGIN)?;
    if !ball.has_exterior(margin) {
        return Err(Error::Precondition("optical ball around T has empty exterior".into()));
    }
    let grid = *ball.grid();
    let band = -grid.spacing();
    let nodes: Vec<usize> = (0..grid.len()).filter(|&i| ball.sdf()[i] > band).collect();
    let k_star: Vec<_> = nodes
        .par_iter()
        .map(|&i| m.optical(tstar, &grid.point(i)).map(|k| k.form()))
        .collect::<Result<_>>()?;
    let taus: Vec<T> = if m.is_static() {
        vec![tstar]
    } else {
        (0..K_TIME_SAMPLES)
            .map(|j| tstar - delta + T::lit(2.0) * delta * T::from_usize_lossy(j) / T::from_usize_lossy(K_TIME_SAMPLES - 1))
            .collect()
    };
    let mut k_all = T::zero();
    let mut k_fwd = T::zero();
    for &tau in &taus {
        let sup = nodes
            .par_iter()
            .zip(k_star.par_iter())
            .map(|(&i, ks)| Ok(ks.generalized_max_eigenvalue(&m.optical(tau, &grid.point(i))?.form())))
            .collect::<Result<Vec<T>>>()?
            .into_iter()
            .fold(T::zero(), T::max);
        k_all = k_all.max(sup);
        if tau >= tstar {
            k_fwd = k_fwd.max(sup);
        }
    }
    let safety = T::lit(K_SAFETY);
    let k = k_all.max(T::one()) * safety;
    Ok(LightspeedEstimate {
        tstar: tstar.to_f(),
        delta: delta.to_f(),
        k_raw: k_all.to_f(),
        k: k.to_f(),
        k_forward_only: (k_fwd.max(T::one()) * safety).to_f(),
        eps: (delta / (T::lit(2.0) * k.sqrt())).to_f(),
        time_samples: taus.len(),
        node_samples: nodes.len(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LightspeedCheck {
    pub t: f64,
    pub t_prime: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LightspeedReport {
    pub estimate: LightspeedEstimate,
    pub checks: Vec<LightspeedCheck>,
    pub worst_margin: f64,
    pub all_pass: bool,
}

/// Checks `{t} × T ⊂ D({t′} × B(T, δ))` for `samples` seeded draws of `t, t′` in the window.
pub fn verify_lightspeed<T: Real>(
    m: &StandardSpacetime<T>,
    target: &Region<T>,
    delta: T,
    tstar: T,
    samples: usize,
    seed: u64,
) -> Result<LightspeedReport> {
    let est = lightspeed_epsilon(m, target, delta, tstar)?;
    let eps = T::lit(est.eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || tstar + eps * T::lit(rng.gen_range(-1.0..1.0));
    let times: Vec<(T, T)> = (0..samples).map(|_| (draw(), draw())).collect();
    check_lightspeed(m, target, delta, tstar, est, &times)
}

/// As [`verify_lightspeed`] at explicit `(t, t′)` pairs, which may lie outside the window.
pub fn verify_lightspeed_at<T: Real>(
    m: &StandardSpacetime<T>,
    target: &Region<T>,
    delta: T,
    tstar: T,
    times: &[(T, T)],
) -> Result<LightspeedReport> {
    let est = lightspeed_epsilon(m, target, delta, tstar)?;
    check_lightspeed(m, target, delta, tstar, est, times)
}

fn check_lightspeed<T: Real>(
    m: &StandardSpacetime<T>,
    target: &Region<T>,
    delta: T,
    tstar: T,
    est: LightspeedEstimate,
    times: &[(T, T)],
) -> Result<LightspeedReport> {
    let ball = optical_ball(m, tstar, target, delta)?;
    let margin = Margin::cells(PAIR_MARGIN)?;
    let checks = times
        .par_iter()
        .map(|&(t, tp)| {
            let d = develop(m, tp, &ball, (t.min(tp), t.max(tp)))?;
            let slice = d.slice(t)?;
            Ok(LightspeedCheck {
                t: t.to_f(),
                t_prime: tp.to_f(),
                margin: containment_margin(&slice, target)?.to_f(),
                pass: contains(&slice, target, margin)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_margin = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(LightspeedReport { estimate: est, checks, worst_margin, all_pass })
}

#[derive(Debug, Clone, Copy)]
pub struct StepOptions {
    /// Seeded uniform `(t₁, t₂)` draws checked in addition to the four window corners.
    pub random_checks: usize,
    pub seed: u64,
    /// Fraction of `ε` used for the corner checks.
    pub corner_fraction: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { random_checks: 2, seed: 0, corner_fraction: 0.95 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepCertificate {
    pub tstar: f64,
    pub delta_s: f64,
    pub delta_t: f64,
    pub delta: f64,
    pub lightspeed: LightspeedEstimate,
    pub eps: f64,
    pub checks: Vec<Precedence>,
    pub worst_margin: f64,
    pub validated: bool,
}

/// Given `S₂ ⋐ S₁ ⋐ T₁ ⋐ T₂` (as `chain`), finds `ε` with `(S₁,T₁)_{t₁} ≺ (S₂,T₂)_{t₂}` for all
/// `t₁, t₂ ∈ (t* − ε, t* + ε)` and validates it by sampling.
pub fn step_pairs<T: Real>(m: &StandardSpacetime<T>, chain: &[Region<T>; 4], tstar: T) -> Result<StepCertificate> {
    step_pairs_with(m, chain, tstar, &StepOptions::default())
}

pub fn step_pairs_with<T: Real>(
    m: &StandardSpacetime<T>,
    chain: &[Region<T>; 4],
    tstar: T,
    opts: &StepOptions,
) -> Result<StepCertificate> {
    let [s2, s1, t1, t2] = chain;
    check_chain(chain)?;
    let delta_s = field_gap(&optical_signed_distance(m, tstar, s2)?, s1)?;
    let delta_t = field_gap(&optical_signed_distance(m, tstar, t1)?, t2)?;
    let delta = delta_s.min(delta_t);
    if !(delta > T::zero()) {
        return Err(Error::ChainViolation(format!("zero optical gap (S: {delta_s}, T: {delta_t})")));
    }
    let est = lightspeed_epsilon(m, t1, delta, tstar)?;
    let eps = T::lit(est.eps);
    let c = eps * T::lit(opts.corner_fraction);
    let mut times = vec![(tstar - c, tstar - c), (tstar - c, tstar + c), (tstar + c, tstar - c), (tstar + c, tstar + c)];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_checks {
        let a = tstar + eps * T::lit(rng.gen_range(-1.0..1.0));
        let b = tstar + eps * T::lit(rng.gen_range(-1.0..1.0));
        times.push((a, b));
    }
    let margin = Margin::cells(PAIR_MARGIN)?;
    let checks = times
        .par_iter()
        .map(|&(ta, tb)| {
            let p1 = CauchyPair::new(ta, s1.clone(), t1.clone());
            let p2 = CauchyPair::new(tb, s2.clone(), t2.clone());
            precedence(&p1, &p2, m, margin)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_margin = checks.iter().map(|c| c.worst_margin()).fold(f64::INFINITY, f64::min);
    let validated = checks.iter().all(|c| c.holds());
    Ok(StepCertificate {
        tstar: tstar.to_f(),
        delta_s: delta_s.to_f(),
        delta_t: delta_t.to_f(),
        delta: delta.to_f(),
        eps: est.eps,
        lightspeed: est,
        checks,
        worst_margin,
        validated,
    })
}

/// Margin-strict inclusions `S₂ ⋐ S₁ ⋐ T₁ ⋐ T₂` and a nonempty exterior for `T₂`.
pub fn check_chain<T: Real>(chain: &[Region<T>]) -> Result<()> {
    let margin = Margin::cells(PAIR_MARGIN)?;
    let first = chain.first().ok_or_else(|| Error::ChainViolation("empty chain".into()))?;
    if first.is_empty() {
        return Err(Error::ChainViolation("innermost region is empty".into()));
    }
    for (i, w) in chain.windows(2).enumerate() {
        if !contains_strict(&w[1], &w[0], margin)? {
            return Err(Error::ChainViolation(format!("region {i} is not compactly inside region {}", i + 1)));
        }
    }
    if !chain[chain.len() - 1].has_exterior(margin) {
        return Err(Error::ChainViolation("outermost region has empty exterior".into()));
    }
    Ok(())
}

/// Image of a pair under a Cauchy morphism, re-validated for regularity.
pub fn transport_pair<T: Real>(phi: &MorphismSpec<T>, p: &CauchyPair<T>, dir: Direction) -> Result<CauchyPair<T>> {
    let out = match phi {
        MorphismSpec::SlabInclusion { lo, hi } => {
            if !(p.t > *lo && p.t < *hi) {
                return Err(Error::Precondition(format!("pair time {} outside slab ({lo}, {hi})", p.t)));
            }
            p.clone()
        }
        MorphismSpec::ScaledDiffeo { c, map } => {
            let t = match dir {
                Direction::Forward => p.t / *c,
                Direction::Inverse => p.t * *c,
            };
            let inner = map_region(map.as_ref(), &p.inner, dir)?;
            let outer = map_region(map.as_ref(), &p.outer, dir)?;
            CauchyPair::new(t, inner, outer)
        }
    };
    match regularity(&out) {
        None => Ok(out),
        Some(why) => Err(Error::Transport(format!("image pair is not regular: {why}"))),
    }
}
