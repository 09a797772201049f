//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::sync::Arc;
use std::time::Instant;

use causalkit::deform::InterpolationTimes;
use causalkit::distal::{DistalProfile, DistanceModel, RadialBump};
use causalkit::morphism::{MorphismSpec, ScalingMap, SpatialMap};
use causalkit::regions::Region;
use causalkit::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<(bool, String), String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn torus(period: f64, cells: usize) -> Grid {
    SpatialGrid::new(2, period, cells).expect("grid")
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn development_oracle(k_scale: f64, expect: f64, limit_s: Option<f64>) -> Outcome {
    let start = Instant::now();
    let g = torus(8.0, 256);
    let m = if k_scale == 1.0 { Spacetime::minkowski(g) } else { Spacetime::ultrastatic(g, k_scale) };
    let u = Region::ball(g, g.center(), 1.0);
    let d = develop(&m, 0.0, &u, (0.0, 0.5)).map_err(e)?;
    let err = hausdorff(&d.slice(0.5).map_err(e)?, &Region::ball(g, g.center(), expect)).map_err(e)?;
    let secs = start.elapsed().as_secs_f64();
    let tol = 2.0 * g.spacing();
    let ok = err <= tol && limit_s.is_none_or(|l| secs < l);
    Ok((ok, format!("hausdorff {err:.4} vs {tol:.4} allowed, {secs:.2} s")))
}

fn lightspeed_certificate() -> Outcome {
    let g = torus(8.0, 128);
    let m = Spacetime::exponential_scale(g, -1.0);
    let target = Region::ball(g, g.center(), 1.0);
    let report = verify_lightspeed(&m, &target, 0.5, 0.0, 20, 7).map_err(e)?;
    // dense oracle: sup over τ ∈ [−δ, δ] and unit directions of k_0(u,u) / k_τ(u,u)
    let mut sup = f64::MIN;
    for i in 0..=2000 {
        let tau = -0.5 + i as f64 / 2000.0;
        for j in 0..16 {
            let a = std::f64::consts::PI * j as f64 / 16.0;
            let u = [a.cos(), a.sin()];
            let k0 = m.optical(0.0, &[1.0, 1.0]).map_err(e)?.form().quad(&u);
            let kt = m.optical(tau, &[1.0, 1.0]).map_err(e)?.form().quad(&u);
            sup = sup.max(k0 / kt);
        }
    }
    let oracle = sup.max(1.0) * 1.05;
    let rel = (report.estimate.k - oracle).abs() / oracle;
    let ok = report.all_pass && report.worst_margin >= 0.0 && report.checks.len() == 20 && rel <= 0.01;
    Ok((
        ok,
        format!(
            "K {:.5} vs oracle {oracle:.5} (rel {rel:.1e}), eps {:.5}, worst margin {:.3} cells over {} pairs",
            report.estimate.k,
            report.estimate.eps,
            report.worst_margin,
            report.checks.len()
        ),
    ))
}

fn interpolation_construction() -> Outcome {
    let g = torus(8.0, 64);
    let m1 = Spacetime::minkowski(g);
    let m2 = Spacetime::ultrastatic(g, 4.0);
    let times = InterpolationTimes::new(0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0).map_err(e)?;
    let i = interpolate(&m1, &m2, times).map_err(e)?;
    let r = verify_interpolation(&i, &m1, &m2, times, 10_000, 11).map_err(e)?;
    Ok((
        r.all_pass && r.samples == 10_000,
        format!(
            "{} samples, endpoint failures {}, cone failures {}, worst endpoint {:.1e}, worst cone margins {:.3} / {:.3}",
            r.samples, r.endpoint_failures, r.cone_failures, r.worst_endpoint_error, r.worst_cone_margin_m1, r.worst_cone_margin_m2
        ),
    ))
}

fn theorem_chain_replay() -> Outcome {
    let start = Instant::now();
    let g = torus(12.0, 256);
    let mbm = Spacetime::minkowski(g);
    let mbn = Spacetime::ultrastatic(g, 4.0);
    let p = Pair::regular(0.0, Region::ball(g, g.center(), 1.0), Region::ball(g, g.center(), 2.0)).map_err(e)?;
    let r = verify_theorem_chain(&mbm, &mbn, &[p], ChainMode::Both, &ChainOptions::default()).map_err(e)?;
    let secs = start.elapsed().as_secs_f64();
    let mut containments = 0;
    let mut held = 0;
    let mut worst = f64::INFINITY;
    for c in &r.chains {
        for l in &c.links {
            containments += 2;
            held += l.precedence.s_holds as usize + l.precedence.t_holds as usize;
            worst = worst.min(l.precedence.worst_margin());
        }
    }
    let ok = r.passed && held == containments && containments >= 4 && secs < 120.0;
    Ok((
        ok,
        format!(
            "t*={:.4}, t_N={:.4}, {held}/{containments} containments at margin 2 (worst {worst:.2} cells), {secs:.1} s{}",
            r.t_star,
            r.t_n,
            r.failures.first().map(|f| format!(", first failure: {f}")).unwrap_or_default()
        ),
    ))
}

fn distal_metric_certificates() -> Outcome {
    let g = torus(16.0, 64);
    let half: Arc<dyn SpatialMap<f64>> = Arc::new(ScalingMap::new(2, g.center(), 0.5).map_err(e)?);
    let f_lin = MorphismSpec::scaled_diffeo(2.0, half.clone(), &g).map_err(e)?;
    let chi = RadialBump::build(1.0, 0.5, 1.5, 6.0).map_err(e)?;
    let f_rad = radial_diffeo(chi, g.center(), &g).map_err(e)?;
    let profile = DistalProfile::new(1.0).map_err(e)?;
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for f in [&f_lin, &f_rad] {
        let gm = distal_metric(f, profile, &g).map_err(e)?;
        let cert = distal_cone_certificate(&gm, 1.0, 10_000, 5, 1e-10).map_err(e)?;
        ok &= cert.pass && cert.samples == 10_000;
        worst = worst.min(cert.min_eigenvalue);
    }
    // κ for the linear contraction x ↦ x/2: D(f⁻¹) = 2·identity
    let mut model = DistanceModel::uniform(0.0125, 640).map_err(e)?;
    model.seed_all(0.5).map_err(e)?;
    let s = Region::ball(g, g.center(), 2.0);
    let b = apply_diffeo_bound(&model, &f_lin, &s, 0.05, 1.0).map_err(e)?;
    let dk = (b.kappa - 2.0).abs();
    ok &= dk <= 1e-12;
    Ok((ok, format!("min eig(k_g − δ) {worst:.3e} over 2×10⁴ samples, |κ − λ| = {dk:.1e}")))
}

fn bisection_recursion() -> Outcome {
    let start = Instant::now();
    let mut model = DistanceModel::uniform(0.0125, 400).map_err(e)?;
    model.seed_all(1.0).map_err(e)?;
    let direct = bisection_refine(&model, 1.0, 0.1, 5).map_err(e)?;
    let formula = 1.0 / 2f64.powi(32) + (1.0 - 2f64.powi(-32)) * 0.1 / 16.0;
    let trace = refine_until(&mut model, 1.0, 1.0, 5, 1e-6, 25).map_err(e)?;
    let secs = start.elapsed().as_secs_f64();
    let ok = direct <= 0.00626 && (direct - formula).abs() <= 1e-15 && trace.reached && trace.history.len() <= 25 && secs < 1.0;
    Ok((
        ok,
        format!(
            "one step {direct:.6}, scheduled bound {:.3e} after {} iterations, {:.3} s",
            trace.bound,
            trace.history.len(),
            secs
        ),
    ))
}

fn bump_constraints() -> Outcome {
    let chi = RadialBump::build(1.0_f64, 0.5, 1.5, 6.0).map_err(e)?;
    let lin = (chi.value(2.0) - 1.0).abs();
    // independent slope check by central differences over the support
    let h = 1e-6;
    let mut min_fd = f64::INFINITY;
    for i in 0..10_000 {
        let r = h + (chi.support - 2.0 * h) * i as f64 / 9_999.0;
        min_fd = min_fd.min((chi.value(r + h) - chi.value(r - h)) / (2.0 * h));
    }
    let ok = lin <= 1e-12 && chi.min_sampled_slope >= -0.95 && min_fd >= -0.95;
    Ok((ok, format!("|χ(2) − 1| = {lin:.1e}, min χ′ {:.4} (finite differences {min_fd:.4})", chi.min_sampled_slope)))
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let g = torus(8.0, 64);
    let m = Spacetime::minkowski(g);
    let c = g.center();

    let mut transitive = 0;
    for _ in 0..50 {
        let t: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let slack = || 0.3;
        let a3 = rng.gen_range(0.6..0.9);
        let a2 = a3 + (t[2] - t[1]).abs() + slack();
        let a1 = a2 + (t[1] - t[0]).abs() + slack();
        let b1 = a1 + rng.gen_range(0.4..0.6);
        let b2 = b1 + (t[1] - t[0]).abs() + slack();
        let b3 = b2 + (t[2] - t[1]).abs() + slack();
        let shift = [rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05)];
        let ball = |r: f64| Region::ball(g, [c[0] + shift[0], c[1] + shift[1]], r);
        let p = |i: usize, a: f64, b: f64| Pair::regular(t[i], ball(a), ball(b));
        let (p1, p2, p3) = (p(0, a1, b1).map_err(e)?, p(1, a2, b2).map_err(e)?, p(2, a3, b3).map_err(e)?);
        let h12 = precedes_margin(&p1, &p2, &m).map_err(e)? >= 2.0;
        let h23 = precedes_margin(&p2, &p3, &m).map_err(e)? >= 2.0;
        if h12 && h23 && precedes(&p1, &p3, &m, Margin::ZERO).map_err(e)? {
            transitive += 1;
        }
    }

    let mut monotone = 0;
    for _ in 0..20 {
        let ctr = [c[0] + rng.gen_range(-0.5..0.5), c[1] + rng.gen_range(-0.5..0.5)];
        let u = Region::axis_box(g, ctr, [rng.gen_range(0.4..1.0), rng.gen_range(0.4..1.0)]);
        let extra = Region::ball(g, [c[0] + rng.gen_range(-1.5..1.5), c[1] + rng.gen_range(-1.5..1.5)], rng.gen_range(0.3..0.8));
        let v = u.dilate(rng.gen_range(0.1..0.5)).map_err(e)?.union(&extra).map_err(e)?;
        let du = develop(&m, 0.0, &u, (-0.4, 0.4)).map_err(e)?;
        let dv = develop(&m, 0.0, &v, (-0.4, 0.4)).map_err(e)?;
        let mut ok = true;
        for t in [-0.4, -0.2, 0.0, 0.2, 0.4] {
            ok &= contains(&dv.slice(t).map_err(e)?, &du.slice(t).map_err(e)?, Margin::ZERO).map_err(e)?;
        }
        monotone += ok as usize;
    }

    let aniso = Spacetime::from_expressions(g, "1", &["1 + 0.5*sin(pi*x1/4)^2", "0.2*cos(pi*x2/4)", "2"]).map_err(e)?;
    let mut semigroup = 0;
    let mut worst_sg: f64 = 0.0;
    for _ in 0..10 {
        let u = Region::ball(g, [c[0] + rng.gen_range(-1.0..1.0), c[1] + rng.gen_range(-1.0..1.0)], rng.gen_range(0.5..1.0));
        let (a, b) = (rng.gen_range(0.2..0.6), rng.gen_range(0.2..0.6));
        let two = optical_ball(&aniso, 0.0, &optical_ball(&aniso, 0.0, &u, a).map_err(e)?, b).map_err(e)?;
        let one = optical_ball(&aniso, 0.0, &u, a + b).map_err(e)?;
        let h = hausdorff(&two, &one).map_err(e)? / g.spacing();
        worst_sg = worst_sg.max(h);
        semigroup += (h <= 3.0) as usize;
    }

    let err_at = |cells: usize| -> std::result::Result<f64, String> {
        let g = torus(8.0, cells);
        let m = Spacetime::minkowski(g);
        let mut total = 0.0;
        for off in [0.0, 0.013, 0.037] {
            let ctr = [4.0 + off, 4.0 - off];
            let d = develop(&m, 0.0, &Region::ball(g, ctr, 1.0), (0.0, 0.5)).map_err(e)?;
            total += hausdorff(&d.slice(0.5).map_err(e)?, &Region::ball(g, ctr, 0.5)).map_err(e)?;
        }
        Ok(total / 3.0)
    };
    let (coarse, fine) = (err_at(64)?, err_at(128)?);
    let factor = coarse / fine;

    let ok = transitive == 50 && monotone == 20 && semigroup == 10 && factor >= 1.5;
    Ok((
        ok,
        format!(
            "transitivity {transitive}/50, monotonicity {monotone}/20, ball semigroup {semigroup}/10 (worst {worst_sg:.2} cells), convergence factor {factor:.2}"
        ),
    ))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("minkowski development oracle", Box::new(|| development_oracle(1.0, 0.5, Some(10.0)))),
        ("constant optical metric oracle", Box::new(|| development_oracle(4.0, 0.75, None))),
        ("light-speed window certificate", Box::new(lightspeed_certificate)),
        ("interpolating metric construction", Box::new(interpolation_construction)),
        ("theorem chain replay (both modes)", Box::new(theorem_chain_replay)),
        ("distal metric cone certificates", Box::new(distal_metric_certificates)),
        ("bisection recursion", Box::new(bisection_recursion)),
        ("radial bump constraints", Box::new(bump_constraints)),
        ("property suites", Box::new(property_suites)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(err) => (false, format!("error: {err}")),
        };
        failed += !ok as usize;
        println!("criterion {} [{}] {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
