//! One handler per scenario command. Each returns checks, a JSON results block and optional
//! contour and provenance data.

use causalkit::deform::{ChainMode, ChainOptions, InterpolationTimes};
use causalkit::distal::{
    apply_easydistal, distal_cone_certificate, drive_all_below, refine_until, sampled_contraction_excess, DistanceModel, Provenance,
};
use causalkit::pairs::StepOptions;
use causalkit::{
    develop, hausdorff, interpolate, optical_ball, step_pairs_with, verify_interpolation, verify_lightspeed, verify_theorem_chain, Region,
};
use serde_json::{json, Value};

use crate::build::World;
use crate::error::{CliError, Stage};
use crate::report::{Check, SliceContours};
use crate::scenario::{Command, Mode, Rule, Scenario, Shape};

/// Containment checks report the signed margin in cells; pass/fail uses the library's
/// two-cell decision rule.
const DECIDED: &str = "value is the worst signed margin in cells; decided at margin 2";

/// Longer provenance logs go to the JSON-lines file only.
pub const EMBEDDED_PROVENANCE: usize = 1000;

#[derive(Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
    pub contours: SliceContours,
    pub provenance: Option<Vec<Provenance>>,
}

pub fn execute(s: &Scenario, w: &World, seed: u64) -> Result<Outcome, CliError> {
    match &s.command {
        Command::Develop { spacetime, region, t0, horizon, slices, oracle_speed } => {
            let oracle = oracle_speed.map(|v| match &s.regions[region] {
                Shape::Ball { radius, .. } => (v, *radius),
                _ => unreachable!("validated: oracle needs a ball"),
            });
            run_develop(s, w, spacetime, region, *t0, *horizon, slices, oracle)
        }
        Command::Ball { spacetime, region, t, delta, expected_radius } => {
            let m = w.spacetime(spacetime);
            let u = w.region(region);
            let b = optical_ball(m, *t, u, *delta).stage("optical ball")?;
            let mut out = Outcome::default();
            let mut res = json!({
                "t": t,
                "delta": delta,
                "measure": b.measure(),
                "inside_nodes": b.inside_count(),
            });
            if let Some(r) = expected_radius {
                let center = u.ball_hint().map(|h| h.center).unwrap_or_else(|| w.grid.center());
                let want = Region::ball(w.grid, center, *r);
                let h = hausdorff(&b, &want).stage("hausdorff")?;
                let tol = s.tolerances.hausdorff_cells * w.grid.spacing();
                res["hausdorff"] = json!(h);
                out.checks.push(Check::at_most(format!("ball matches radius {r}"), h, tol));
            }
            out.checks.push(Check::new("ball is nonempty", !b.is_empty()));
            out.contours.push((*t, b.contours()));
            out.results = res;
            Ok(out)
        }
        Command::VerifyLightspeed { spacetime, target, delta, tstar, samples } => {
            let r = verify_lightspeed(w.spacetime(spacetime), w.region(target), *delta, *tstar, *samples, seed).stage("light-speed window")?;
            let mut out = Outcome::default();
            for c in &r.checks {
                out.checks.push(
                    Check::new(format!("T inside D(B(T, delta)) at t={:.6}, t'={:.6}", c.t, c.t_prime), c.pass)
                        .value(c.margin)
                        .detail(DECIDED),
                );
            }
            out.results = json!(r);
            Ok(out)
        }
        Command::VerifyStep { spacetime, chain, tstar, random_checks, corner_fraction } => {
            let regions = chain.clone().map(|n| w.region(&n).clone());
            let opts = StepOptions { random_checks: *random_checks, seed, corner_fraction: *corner_fraction };
            let cert = step_pairs_with(w.spacetime(spacetime), &regions, *tstar, &opts).stage("step pairs")?;
            let mut out = Outcome::default();
            for p in &cert.checks {
                out.checks.push(
                    Check::new(format!("(S1,T1) at {:.6} precedes (S2,T2) at {:.6}", p.t1, p.t2), p.holds())
                        .value(p.worst_margin())
                        .detail(DECIDED),
                );
            }
            out.results = json!(cert);
            Ok(out)
        }
        Command::Interpolate { m1, m2, times, samples } => {
            let [t1, t1p, t2p, t2] = *times;
            let times = InterpolationTimes::new(t1, t1p, t2p, t2).stage("interpolation times")?;
            let (a, b) = (w.spacetime(m1), w.spacetime(m2));
            let g = interpolate(a, b, times).stage("interpolation")?;
            let r = verify_interpolation(&g, a, b, times, *samples, seed).stage("interpolation check")?;
            let mut out = Outcome::default();
            out.checks.push(Check::at_most("endpoint equality failures", r.endpoint_failures as f64, 0.0).detail(format!(
                "{} checks, worst relative error {:e}",
                r.endpoint_checks, r.worst_endpoint_error
            )));
            out.checks.push(Check::at_most("cone containment failures", r.cone_failures as f64, 0.0).detail(format!(
                "{} checks, worst margins {:e} / {:e}",
                r.cone_checks, r.worst_cone_margin_m1, r.worst_cone_margin_m2
            )));
            out.results = json!({ "times": times, "verification": r });
            Ok(out)
        }
        Command::VerifyTheoremChain { mbm, mbn, pairs, mode, interpolation_samples, random_checks } => {
            let ps: Vec<_> = pairs.iter().map(|p| w.pairs[p].clone()).collect();
            let opts = ChainOptions {
                step: StepOptions { random_checks: *random_checks, seed, ..StepOptions::default() },
                interpolation_samples: *interpolation_samples,
                seed,
            };
            let mode = match mode {
                Mode::Split => ChainMode::Split,
                Mode::Rs => ChainMode::Rs,
                Mode::Both => ChainMode::Both,
                Mode::WeakDistal => ChainMode::WeakDistal,
            };
            let r = verify_theorem_chain(w.spacetime(mbm), w.spacetime(mbn), &ps, mode, &opts).stage("theorem chain")?;
            let mut out = Outcome::default();
            out.checks.push(Check::new("interpolating metric", r.interpolation.all_pass));
            for c in &r.chains {
                for step in &c.steps {
                    out.checks.push(
                        Check::new(format!("pair {} {}: step {} in {}", c.pair_index, c.kind, step.name, step.spacetime), step.certificate.validated)
                            .value(step.certificate.worst_margin)
                            .detail(DECIDED),
                    );
                }
                for l in &c.links {
                    out.checks.push(
                        Check::new(format!("pair {} {}: {} in {}", c.pair_index, c.kind, l.name, l.spacetime), l.pass)
                            .value(l.precedence.worst_margin())
                            .detail(DECIDED),
                    );
                }
            }
            for f in &r.failures {
                out.checks.push(Check::new("chain failure", false).detail(f.clone()));
            }
            out.results = json!(r);
            Ok(out)
        }
        Command::DistalMetric { spacetime, samples } => {
            let parts = &w.distal[spacetime];
            let g = w.spacetime(spacetime);
            let cert = distal_cone_certificate(g, parts.tstar, *samples, seed, s.tolerances.cone).stage("cone certificate")?;
            let excess = sampled_contraction_excess(&parts.morphism, &w.grid, *samples, seed).stage("contraction sampling")?;
            let mut out = Outcome::default();
            out.checks.push(
                Check::new("cones of g inside Minkowski cones", cert.pass)
                    .value(cert.min_eigenvalue)
                    .limit(-s.tolerances.cone)
                    .detail(format!("{} samples", cert.samples)),
            );
            out.checks.push(Check::at_most("c·|Df| ≤ 1 at sampled points", excess, 0.0));
            out.results = json!({
                "morphism": format!("{:?}", parts.morphism),
                "tstar": parts.tstar,
                "certificate": cert,
                "sampled_contraction_excess": excess,
            });
            Ok(out)
        }
        Command::Splitcalc { radius_step, radius_count, seeds, rules, targets } => {
            run_splitcalc(*radius_step, *radius_count, seeds, rules, targets)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_develop(
    s: &Scenario,
    w: &World,
    spacetime: &str,
    region: &str,
    t0: f64,
    horizon: [f64; 2],
    slices: &[f64],
    oracle: Option<(f64, f64)>,
) -> Result<Outcome, CliError> {
    let u = w.region(region);
    let d = develop(w.spacetime(spacetime), t0, u, (horizon[0], horizon[1])).stage("development")?;
    let mut out = Outcome::default();
    let tol = s.tolerances.hausdorff_cells * w.grid.spacing();
    let mut per_slice = Vec::new();
    for &t in slices {
        let slice = d.slice(t).stage(&format!("slice at t={t}"))?;
        let mut entry = json!({ "t": t, "measure": slice.measure(), "inside_nodes": slice.inside_count() });
        if let Some((speed, radius)) = oracle {
            let r = radius - speed * (t - t0).abs();
            entry["oracle_radius"] = json!(r);
            if r > tol {
                let center = u.ball_hint().map(|h| h.center).unwrap_or_else(|| w.grid.center());
                let h = hausdorff(&slice, &Region::ball(w.grid, center, r)).stage("hausdorff")?;
                entry["hausdorff"] = json!(h);
                out.checks.push(Check::at_most(format!("slice t={t} matches ball {r}"), h, tol));
            } else {
                let inside = slice.inside_count();
                out.checks.push(Check::new(format!("slice t={t} has vanished"), slice.max_sdf() <= tol).detail(format!("{inside} interior nodes")));
            }
        }
        out.contours.push((t, slice.contours()));
        per_slice.push(entry);
    }
    let (lo, hi) = d.horizon();
    out.results = json!({
        "t0": t0,
        "horizon": [lo, hi],
        "dt": d.dt(),
        "steps": d.times().len(),
        "slices": per_slice,
        "summaries": d.summaries(),
    });
    Ok(out)
}

fn run_splitcalc(
    step: f64,
    count: usize,
    seeds: &[crate::scenario::SeedSpec],
    rules: &[Rule],
    targets: &[crate::scenario::TargetSpec],
) -> Result<Outcome, CliError> {
    let mut m = DistanceModel::uniform(step, count).stage("distance model")?;
    m.set_logging(true);
    for sd in seeds {
        match sd.radius {
            Some(r) => {
                m.seed(r, sd.value).stage("seeding")?;
            }
            None => m.seed_all(sd.value).stage("seeding")?,
        }
    }
    let mut applied = Vec::new();
    for rule in rules {
        let entry = match rule {
            Rule::Dilation => json!({ "rule": "dilation", "changes": m.propagate() }),
            Rule::Scaling => json!({ "rule": "scaling", "changes": m.apply_scaling() }),
            Rule::Bisection { eps, k } => {
                let changes = m.apply_bisection(eps, *k).stage("bisection")?;
                json!({ "rule": "bisection", "changes": changes })
            }
            Rule::Refine { radius, eps0, k, target, max_iter } => {
                let trace = refine_until(&mut m, *radius, *eps0, *k, *target, *max_iter).stage("refine")?;
                json!({ "rule": "refine", "trace": trace })
            }
            Rule::Drive { target, k, max_rounds } => {
                let report = drive_all_below(&mut m, *target, *k, *max_rounds).stage("drive")?;
                json!({ "rule": "drive", "report": report })
            }
            Rule::Easydistal { diameter } => {
                json!({ "rule": "easydistal", "diameter": diameter, "bound": apply_easydistal(&m, *diameter) })
            }
        };
        applied.push(entry);
    }
    let mut out = Outcome::default();
    let mut finals = Vec::new();
    for t in targets {
        let b = m.bound_at(t.radius);
        finals.push(json!({ "radius": t.radius, "bound": b }));
        out.checks.push(Check::new(format!("d(B({})) < {:e}", t.radius, t.below), b < t.below).value(b).limit(t.below));
    }
    let log = m.take_log();
    let mut by_rule = std::collections::BTreeMap::<&str, usize>::new();
    for p in &log {
        *by_rule.entry(p.rule.as_str()).or_default() += 1;
    }
    out.results = json!({
        "radius_step": step,
        "radius_count": count,
        "rules": applied,
        "targets": finals,
        "max_bound": m.max_bound(),
        "provenance_entries": log.len(),
        "provenance_by_rule": by_rule,
        "provenance": if log.len() <= EMBEDDED_PROVENANCE { json!(log) } else { Value::Null },
    });
    out.provenance = Some(log);
    Ok(out)
}
