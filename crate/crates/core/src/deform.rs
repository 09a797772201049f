//! Interpolating metrics between two spacetimes and the ordered-pair chains that certify the
//! deformation arguments.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::Point;
use crate::geometry::{cone_margin, optical_metric, FormSampler, ScalarSampler, StandardSpacetime, ANALYTIC_CONE_TOL};
use crate::morphism::{Direction, MorphismSpec};
use crate::pairs::{check_chain, precedence, step_pairs_with, transport_pair, CauchyPair, Precedence, StepCertificate, StepOptions, PAIR_MARGIN};
use crate::regions::{euclidean_gap, Margin, Region};
use crate::scalar::Real;
use crate::smooth::SmoothStep;

/// `t1 < t1p < t2p < t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationTimes<T> {
    pub t1: T,
    pub t1p: T,
    pub t2p: T,
    pub t2: T,
}

impl<T: Real> InterpolationTimes<T> {
    pub fn new(t1: T, t1p: T, t2p: T, t2: T) -> Result<Self> {
        if t1 < t1p && t1p < t2p && t2p < t2 {
            Ok(Self { t1, t1p, t2p, t2 })
        } else {
            Err(Error::Precondition(format!("interpolation times must satisfy {t1} < {t1p} < {t2p} < {t2}")))
        }
    }

    /// Evenly spaced: `t1, t1p` split `(lo, mid)` in thirds, `t2p, t2` split `(mid, hi)`.
    pub fn around(lo: T, mid: T, hi: T) -> Result<Self> {
        let third = T::lit(1.0 / 3.0);
        Self::new(
            lo + (mid - lo) * third,
            lo + (mid - lo) * third * T::lit(2.0),
            mid + (hi - mid) * third,
            mid + (hi - mid) * third * T::lit(2.0),
        )
    }

    fn to_f64(self) -> InterpolationTimes<f64> {
        InterpolationTimes { t1: self.t1.to_f(), t1p: self.t1p.to_f(), t2p: self.t2p.to_f(), t2: self.t2.to_f() }
    }
}

/// Spacetime equal to `m1` for `t ≤ t1` and to `m2` for `t ≥ t2`, whose cones lie inside those of
/// `m1` for `t < t2p` and inside those of `m2` for `t > t1p`.
///
/// `β = w β₁ + (1 − w) β₂` with `w` stepping 1 → 0 over `[t1, t2]`; optical form
/// `k = w₁ k₁ + w₂ k₂` with `w₁` stepping 1 → 0 over `[t2p, t2]` and `w₂` stepping 0 → 1
/// over `[t1, t1p]`.
pub fn interpolate<T: Real>(m1: &StandardSpacetime<T>, m2: &StandardSpacetime<T>, times: InterpolationTimes<T>) -> Result<StandardSpacetime<T>> {
    InterpolationTimes::new(times.t1, times.t1p, times.t2p, times.t2)?;
    if m1.grid() != m2.grid() {
        return Err(Error::GridMismatch);
    }
    let w = SmoothStep::new(times.t1, times.t2);
    let w1 = SmoothStep::new(times.t2p, times.t2);
    let w2 = SmoothStep::new(times.t1, times.t1p);
    let beta_of = {
        let (b1, b2) = (m1.beta_sampler(), m2.beta_sampler());
        move |t: T, x: &Point<T>| -> Result<T> {
            let s = w.value(t);
            Ok((T::one() - s) * b1(t, x)? + s * b2(t, x)?)
        }
    };
    let (t1, t2) = (times.t1, times.t2);
    let beta: ScalarSampler<T> = {
        let (b1, b2) = (m1.beta_sampler(), m2.beta_sampler());
        let mixed = beta_of.clone();
        Arc::new(move |t, x| {
            if t <= t1 {
                b1(t, x)
            } else if t >= t2 {
                b2(t, x)
            } else {
                mixed(t, x)
            }
        })
    };
    let h: FormSampler<T> = {
        let (a, b) = (m1.clone(), m2.clone());
        Arc::new(move |t, x| {
            if t <= t1 {
                a.hmetric(t, x)
            } else if t >= t2 {
                b.hmetric(t, x)
            } else {
                let k1 = optical_metric(&a, t, x)?.form();
                let k2 = optical_metric(&b, t, x)?.form();
                let k = k1 * (T::one() - w1.value(t)) + k2 * w2.value(t);
                Ok(k * beta_of(t, x)?)
            }
        })
    };
    Ok(StandardSpacetime::new(*m1.grid(), beta, h).with_label(format!("interpolate({}, {})", m1.label(), m2.label())))
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationReport {
    pub samples: usize,
    pub endpoint_checks: usize,
    pub cone_checks: usize,
    pub endpoint_failures: usize,
    pub cone_failures: usize,
    pub worst_endpoint_error: f64,
    /// Smallest eigenvalue of `k_g − k₁` over samples with `t < t2p`.
    pub worst_cone_margin_m1: f64,
    /// Smallest eigenvalue of `k_g − k₂` over samples with `t > t1p`.
    pub worst_cone_margin_m2: f64,
    pub first_failure: Option<String>,
    pub all_pass: bool,
}

fn rel_err<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}

/// Samples the three slabs `t ≤ t1`, `(t1, t2)`, `t ≥ t2`: endpoint equality with `m1` / `m2`
/// (relative `1e−12`) on the outer slabs and cone containment (tolerance `1e−10`) wherever
/// it is required.
pub fn verify_interpolation<T: Real>(
    g: &StandardSpacetime<T>,
    m1: &StandardSpacetime<T>,
    m2: &StandardSpacetime<T>,
    times: InterpolationTimes<T>,
    samples: usize,
    seed: u64,
) -> Result<InterpolationReport> {
    let grid = *g.grid();
    let span = times.t2 - times.t1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(T, Point<T>)> = (0..samples)
        .map(|i| {
            let u = T::lit(rng.gen_range(0.0..1.0));
            let t = match i % 3 {
                0 => times.t1 - span * u,
                1 => times.t1 + span * u,
                _ => times.t2 + span * u,
            };
            let mut x = [T::zero(); 2];
            for xi in x.iter_mut().take(grid.dim()) {
                *xi = grid.period() * T::lit(rng.gen_range(0.0..1.0));
            }
            (t, x)
        })
        .collect();
    struct Outcome {
        endpoint: Option<f64>,
        m1: Option<f64>,
        m2: Option<f64>,
        failure: Option<String>,
    }
    let tol = T::lit(ANALYTIC_CONE_TOL);
    let rel_tol = T::lit(1e-12);
    let outcomes = draws
        .par_iter()
        .map(|&(t, x)| -> Result<Outcome> {
            let mut out = Outcome { endpoint: None, m1: None, m2: None, failure: None };
            let reference = if t <= times.t1 {
                Some(m1)
            } else if t >= times.t2 {
                Some(m2)
            } else {
                None
            };
            if let Some(r) = reference {
                let hg = g.hmetric(t, &x)?;
                let hr = r.hmetric(t, &x)?;
                let e = [
                    rel_err(g.beta(t, &x)?, r.beta(t, &x)?),
                    rel_err(hg.xx(), hr.xx()),
                    rel_err(hg.xy(), hr.xy()),
                    rel_err(hg.yy(), hr.yy()),
                ]
                .into_iter()
                .fold(T::zero(), T::max);
                out.endpoint = Some(e.to_f());
                if e > rel_tol {
                    out.failure = Some(format!("endpoint mismatch {e} at t={t}, x={x:?}"));
                }
            }
            if t < times.t2p {
                let c = cone_margin(g, m1, t, &x)?;
                out.m1 = Some(c.to_f());
                if c < -tol {
                    out.failure = Some(format!("cone of g not inside cone of M1 at t={t}, x={x:?} (margin {c})"));
                }
            }
            if t > times.t1p {
                let c = cone_margin(g, m2, t, &x)?;
                out.m2 = Some(c.to_f());
                if c < -tol {
                    out.failure = Some(format!("cone of g not inside cone of M2 at t={t}, x={x:?} (margin {c})"));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let rel_tol = rel_tol.to_f();
    let tol = tol.to_f();
    let endpoint: Vec<f64> = outcomes.iter().filter_map(|o| o.endpoint).collect();
    let c1: Vec<f64> = outcomes.iter().filter_map(|o| o.m1).collect();
    let c2: Vec<f64> = outcomes.iter().filter_map(|o| o.m2).collect();
    let endpoint_failures = endpoint.iter().filter(|&&e| e > rel_tol).count();
    let cone_failures = outcomes
        .iter()
        .filter(|o| o.m1.is_some_and(|c| c < -tol) || o.m2.is_some_and(|c| c < -tol))
        .count();
    Ok(InterpolationReport {
        samples,
        endpoint_checks: endpoint.len(),
        cone_checks: c1.len() + c2.len(),
        endpoint_failures,
        cone_failures,
        worst_endpoint_error: endpoint.iter().copied().fold(0.0, f64::max),
        worst_cone_margin_m1: c1.iter().copied().fold(f64::INFINITY, f64::min),
        worst_cone_margin_m2: c2.iter().copied().fold(f64::INFINITY, f64::min),
        first_failure: outcomes.iter().find_map(|o| o.failure.clone()),
        all_pass: endpoint_failures == 0 && cone_failures == 0,
    })
}

/// One arrow of the chain `M ← P → I ← F → N`.
#[derive(Debug, Clone)]
pub struct ChainLink<T: Real> {
    pub source: &'static str,
    pub target: &'static str,
    pub morphism: MorphismSpec<T>,
    /// `Forward` when the arrow points from `source` to `target` as written in the chain.
    pub direction: Direction,
}

/// `M ← P → I ← F → N`, with `P = (−∞, t1) × Σ` and `F = (t2, ∞) × Σ` embedded by slab
/// inclusions.
#[derive(Debug, Clone)]
pub struct CauchyChain<T: Real> {
    pub links: Vec<ChainLink<T>>,
    pub times: InterpolationTimes<T>,
}

impl<T: Real> CauchyChain<T> {
    pub fn interpolating(times: InterpolationTimes<T>) -> Result<Self> {
        let past = MorphismSpec::slab(T::neg_infinity(), times.t1)?;
        let future = MorphismSpec::slab(times.t2, T::infinity())?;
        let link = |source, target, m: &MorphismSpec<T>, direction| ChainLink { source, target, morphism: m.clone(), direction };
        Ok(Self {
            links: vec![
                link("P", "M", &past, Direction::Inverse),
                link("P", "I", &past, Direction::Forward),
                link("F", "I", &future, Direction::Inverse),
                link("F", "N", &future, Direction::Forward),
            ],
            times,
        })
    }

    /// Carries a pair of `M` (at `t < t1`) or of `N` (at `t > t2`) into the interpolating
    /// spacetime along the chain.
    pub fn carry_to_interpolating(&self, p: &CauchyPair<T>, from_n: bool) -> Result<CauchyPair<T>> {
        let (a, b) = if from_n { (&self.links[3], &self.links[2]) } else { (&self.links[0], &self.links[1]) };
        let in_source = transport_pair(&a.morphism, p, Direction::Inverse)?;
        transport_pair(&b.morphism, &in_source, Direction::Forward)
    }

    pub fn describe(&self) -> Vec<String> {
        self.links
            .iter()
            .map(|l| {
                let arrow = match l.direction {
                    Direction::Forward => format!("{} -> {}", l.source, l.target),
                    Direction::Inverse => format!("{} <- {}", l.target, l.source),
                };
                format!("{arrow}: {:?}", l.morphism)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMode {
    Split,
    Rs,
    Both,
    WeakDistal,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainOptions {
    pub step: StepOptions,
    pub interpolation_samples: usize,
    pub seed: u64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self { step: StepOptions::default(), interpolation_samples: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedStep {
    pub name: String,
    pub spacetime: &'static str,
    pub certificate: StepCertificate,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkCheck {
    pub name: String,
    pub spacetime: &'static str,
    pub precedence: Precedence,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairChain {
    pub pair_index: usize,
    pub kind: &'static str,
    pub gap: f64,
    pub offsets: Vec<f64>,
    pub steps: Vec<NamedStep>,
    pub links: Vec<LinkCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub mode: ChainMode,
    pub t_m: f64,
    pub t_star: f64,
    pub t_n: f64,
    pub times: InterpolationTimes<f64>,
    pub cauchy_chain: Vec<String>,
    pub interpolation: InterpolationReport,
    pub chains: Vec<PairChain>,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Regions and step certificates for one pair in one direction.
struct Plan<T: Real> {
    pair_index: usize,
    kind: &'static str,
    gap: T,
    offsets: Vec<T>,
    m_pair: (Region<T>, Region<T>),
    star: (Region<T>, Region<T>),
    n_pair: (Region<T>, Region<T>),
    // weak-distal only: (S̃, T̃)
    tilde: Option<(Region<T>, Region<T>)>,
    steps: Vec<NamedStep>,
}

fn split_star<T: Real>(s: &Region<T>, t: &Region<T>) -> Result<(T, Region<T>, Region<T>)> {
    let o = euclidean_gap(s, t)? / T::lit(3.0);
    Ok((o, s.dilate(o)?, t.dilate(-o)?))
}

fn rs_star<T: Real>(s: &Region<T>, t: &Region<T>) -> Result<(T, Region<T>, Region<T>)> {
    let three = T::lit(3.0);
    let o = (euclidean_gap(s, t)? / three).min(s.inradius()? / three).min(t.exterior_depth()? / three);
    Ok((o, s.dilate(-o)?, t.dilate(o)?))
}

/// Replays the deformation argument numerically for every pair (all at one time `t_M` in
/// `mbm`), choosing `t*`, `t_N` from the step certificates, building the interpolating metric,
/// and checking each ordering of the resulting chain in it at margin 2.
pub fn verify_theorem_chain<T: Real>(
    mbm: &StandardSpacetime<T>,
    mbn: &StandardSpacetime<T>,
    pairs: &[CauchyPair<T>],
    mode: ChainMode,
    opts: &ChainOptions,
) -> Result<ChainReport> {
    if mbm.grid() != mbn.grid() {
        return Err(Error::GridMismatch);
    }
    let first = pairs.first().ok_or_else(|| Error::Precondition("no pairs given".into()))?;
    let t_m = first.t;
    if pairs.iter().any(|p| p.t != t_m) {
        return Err(Error::Precondition("pairs must share one time slice".into()));
    }
    for (i, p) in pairs.iter().enumerate() {
        if let Some(why) = crate::pairs::regularity(p) {
            return Err(Error::Precondition(format!("pair {i} is not regular: {why}")));
        }
    }
    let so = |k: u64| StepOptions { seed: opts.step.seed.wrapping_add(k), ..opts.step };
    let mut plans: Vec<Plan<T>> = Vec::new();
    let (t_star, t_n);
    if mode == ChainMode::WeakDistal {
        for (i, p) in pairs.iter().enumerate() {
            let g = euclidean_gap(&p.inner, &p.outer)?;
            let dil = |j: f64| p.inner.dilate(g * T::lit(j / 7.0));
            let r: Vec<Region<T>> = (1..=6).map(|j| dil(j as f64)).collect::<Result<_>>()?;
            let mut full = vec![p.inner.clone()];
            full.extend(r.iter().cloned());
            full.push(p.outer.clone());
            check_chain(&full)?;
            plans.push(Plan {
                pair_index: i,
                kind: "weak-distal",
                gap: g,
                offsets: (1..=6).map(|j| g * T::lit(j as f64 / 7.0)).collect(),
                m_pair: (p.inner.clone(), p.outer.clone()),
                star: (r[0].clone(), r[5].clone()),
                n_pair: (r[1].clone(), r[4].clone()),
                tilde: Some((r[2].clone(), r[3].clone())),
                steps: Vec::new(),
            });
        }
        let mut eps_ab = T::infinity();
        for (k, plan) in plans.iter_mut().enumerate() {
            let (sn, tn) = plan.n_pair.clone();
            let (st, tt) = plan.tilde.clone().expect("weak plan");
            let a = step_pairs_with(mbn, &[sn, st, tt, tn], t_m, &so(3 * k as u64))?;
            let b = step_pairs_with(
                mbm,
                &[plan.m_pair.0.clone(), plan.star.0.clone(), plan.star.1.clone(), plan.m_pair.1.clone()],
                t_m,
                &so(3 * k as u64 + 1),
            )?;
            eps_ab = eps_ab.min(T::lit(a.eps)).min(T::lit(b.eps));
            plan.steps.push(NamedStep { name: "tilde-to-N".into(), spacetime: "N", certificate: a });
            plan.steps.push(NamedStep { name: "star-to-M".into(), spacetime: "M", certificate: b });
        }
        let tn = t_m + eps_ab / T::lit(2.0);
        let mut eps_c = T::infinity();
        for (k, plan) in plans.iter_mut().enumerate() {
            let c = step_pairs_with(
                mbn,
                &[plan.star.0.clone(), plan.n_pair.0.clone(), plan.n_pair.1.clone(), plan.star.1.clone()],
                tn,
                &so(3 * k as u64 + 2),
            )?;
            eps_c = eps_c.min(T::lit(c.eps));
            plan.steps.push(NamedStep { name: "N-to-star".into(), spacetime: "N", certificate: c });
        }
        t_star = tn - eps_c.min(tn - t_m) / T::lit(2.0);
        t_n = tn;
    } else {
        let kinds: &[&'static str] = match mode {
            ChainMode::Split => &["split"],
            ChainMode::Rs => &["rs"],
            _ => &["split", "rs"],
        };
        for (i, p) in pairs.iter().enumerate() {
            for &kind in kinds {
                let (o, s_star, t_star) = if kind == "split" { split_star(&p.inner, &p.outer)? } else { rs_star(&p.inner, &p.outer)? };
                let (o2, s_n, t_nn) = if kind == "split" { split_star(&s_star, &t_star)? } else { rs_star(&s_star, &t_star)? };
                plans.push(Plan {
                    pair_index: i,
                    kind,
                    gap: euclidean_gap(&p.inner, &p.outer)?,
                    offsets: vec![o, o2],
                    m_pair: (p.inner.clone(), p.outer.clone()),
                    star: (s_star, t_star),
                    n_pair: (s_n, t_nn),
                    tilde: None,
                    steps: Vec::new(),
                });
            }
        }
        let chain_m = |p: &Plan<T>| -> [Region<T>; 4] {
            if p.kind == "split" {
                [p.m_pair.0.clone(), p.star.0.clone(), p.star.1.clone(), p.m_pair.1.clone()]
            } else {
                [p.star.0.clone(), p.m_pair.0.clone(), p.m_pair.1.clone(), p.star.1.clone()]
            }
        };
        let chain_n = |p: &Plan<T>| -> [Region<T>; 4] {
            if p.kind == "split" {
                [p.star.0.clone(), p.n_pair.0.clone(), p.n_pair.1.clone(), p.star.1.clone()]
            } else {
                [p.n_pair.0.clone(), p.star.0.clone(), p.star.1.clone(), p.n_pair.1.clone()]
            }
        };
        let mut eps_m = T::infinity();
        for (k, plan) in plans.iter_mut().enumerate() {
            let c = step_pairs_with(mbm, &chain_m(plan), t_m, &so(2 * k as u64))?;
            eps_m = eps_m.min(T::lit(c.eps));
            plan.steps.push(NamedStep { name: "M-step".into(), spacetime: "M", certificate: c });
        }
        let ts = t_m + eps_m / T::lit(2.0);
        let mut eps_n = T::infinity();
        for (k, plan) in plans.iter_mut().enumerate() {
            let c = step_pairs_with(mbn, &chain_n(plan), ts, &so(2 * k as u64 + 1))?;
            eps_n = eps_n.min(T::lit(c.eps));
            plan.steps.push(NamedStep { name: "N-step".into(), spacetime: "N", certificate: c });
        }
        t_star = ts;
        t_n = ts + eps_n / T::lit(2.0);
    }

    let times = InterpolationTimes::around(t_m, t_star, t_n)?;
    let interp = interpolate(mbm, mbn, times)?;
    let interpolation = verify_interpolation(&interp, mbm, mbn, times, opts.interpolation_samples, opts.seed)?;
    let cauchy = CauchyChain::interpolating(times)?;
    let margin = Margin::cells(PAIR_MARGIN)?;

    let mut failures = Vec::new();
    if !interpolation.all_pass {
        failures.push(format!("interpolating metric: {}", interpolation.first_failure.clone().unwrap_or_default()));
    }
    let mut chains = Vec::new();
    for plan in plans {
        let pm = cauchy.carry_to_interpolating(&CauchyPair::new(t_m, plan.m_pair.0.clone(), plan.m_pair.1.clone()), false)?;
        let pn = cauchy.carry_to_interpolating(&CauchyPair::new(t_n, plan.n_pair.0.clone(), plan.n_pair.1.clone()), true)?;
        let ps = CauchyPair::new(t_star, plan.star.0.clone(), plan.star.1.clone());
        // (name, spacetime, earlier pair, later pair)
        let mut jobs: Vec<(&str, &'static str, CauchyPair<T>, CauchyPair<T>)> = Vec::new();
        if plan.kind == "rs" {
            jobs.push(("M-pair precedes star", "I", pm.clone(), ps.clone()));
            jobs.push(("star precedes N-pair", "I", ps.clone(), pn.clone()));
            jobs.push(("composite M-pair precedes N-pair", "I", pm, pn));
        } else {
            jobs.push(("N-pair precedes star", "I", pn.clone(), ps.clone()));
            jobs.push(("star precedes M-pair", "I", ps.clone(), pm.clone()));
            jobs.push(("composite N-pair precedes M-pair", "I", pn.clone(), pm));
            if let Some((st, tt)) = &plan.tilde {
                jobs.insert(0, ("tilde precedes N-pair", "N", CauchyPair::new(t_m, st.clone(), tt.clone()), pn));
            }
        }
        let links = jobs
            .par_iter()
            .map(|(name, st, a, b)| {
                let space = if *st == "N" { mbn } else { &interp };
                let p = precedence(a, b, space, margin)?;
                Ok(LinkCheck { name: name.to_string(), spacetime: st, pass: p.holds(), precedence: p })
            })
            .collect::<Result<Vec<_>>>()?;
        for l in &links {
            if !l.pass {
                failures.push(format!(
                    "pair {} ({}): {} fails (S margin {:.3}, T margin {:.3} cells)",
                    plan.pair_index, plan.kind, l.name, l.precedence.s_margin, l.precedence.t_margin
                ));
            }
        }
        for s in &plan.steps {
            if !s.certificate.validated {
                failures.push(format!(
                    "pair {} ({}): step {} not validated (worst margin {:.3} cells)",
                    plan.pair_index, plan.kind, s.name, s.certificate.worst_margin
                ));
            }
        }
        let passed = links.iter().all(|l| l.pass) && plan.steps.iter().all(|s| s.certificate.validated);
        chains.push(PairChain {
            pair_index: plan.pair_index,
            kind: plan.kind,
            gap: plan.gap.to_f(),
            offsets: plan.offsets.iter().map(|o| o.to_f()).collect(),
            steps: plan.steps,
            links,
            passed,
        });
    }
    Ok(ChainReport {
        mode,
        t_m: t_m.to_f(),
        t_star: t_star.to_f(),
        t_n: t_n.to_f(),
        times: times.to_f64(),
        cauchy_chain: cauchy.describe(),
        passed: failures.is_empty(),
        interpolation,
        chains,
        failures,
    })
}
