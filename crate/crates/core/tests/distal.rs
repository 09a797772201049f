use std::sync::Arc;

use causalkit::distal::{sampled_contraction_excess, DistalProfile, DistanceModel, RadialBump, RadialDiffeo};
use causalkit::morphism::{IdentityMap, MorphismSpec, ScalingMap, SpatialMap};
use causalkit::regions::Region;
use causalkit::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(period: f64, cells: usize) -> Grid {
    SpatialGrid::new(2, period, cells).unwrap()
}

fn bump() -> Bump {
    RadialBump::build(1.0, 0.5, 1.5, 6.0).unwrap()
}

#[test]
fn bump_sections() {
    let chi = bump();
    assert!((chi.value(2.0) - 1.0).abs() <= 1e-12);
    assert_eq!(chi.value(0.8), 0.0);
    assert_eq!(chi.value(chi.end + 0.01), 0.0);
    assert!(chi.min_sampled_slope > -1.0);
    assert!(RadialBump::build(1.0, 0.5, 1.5, 4.0).is_err());
}

#[test]
fn identity_profile_is_identity() {
    let g = grid(16.0, 64);
    let f = RadialDiffeo::new(2, g.center(), RadialBump::<f64>::zero());
    let d = [0.7, -1.3];
    assert_eq!(f.forward_local(&d), d);
    let j = f.jacobian_local(&d);
    assert_eq!((j.entry(0, 0), j.entry(0, 1), j.entry(1, 0), j.entry(1, 1)), (1.0, 0.0, 0.0, 1.0));
}

#[test]
fn radial_map_examples() {
    let g = grid(16.0, 64);
    let f = RadialDiffeo::new(2, g.center(), bump());
    assert!((f.radial(2.0) - 3.0).abs() <= 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let d = [rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)];
        let back = f.inverse_local(&f.forward_local(&d)).unwrap();
        assert!(((back[0] - d[0]).powi(2) + (back[1] - d[1]).powi(2)).sqrt() <= 1e-10);
    }
}

#[test]
fn linear_contraction_metric() {
    let g = grid(16.0, 64);
    let half: Arc<dyn SpatialMap<f64>> = Arc::new(ScalingMap::new(2, g.center(), 0.5).unwrap());
    let f = MorphismSpec::scaled_diffeo(2.0, half, &g).unwrap();
    let m = distal_metric(&f, DistalProfile::new(1.0).unwrap(), &g).unwrap();
    for t in [-1.0, 0.0] {
        let x = [3.0, 9.0];
        assert!((m.beta(t, &x).unwrap() - 4.0).abs() < 1e-12);
        assert!((m.hmetric(t, &x).unwrap() - SymForm::scaled_identity(2, 4.0)).max_abs_entry() < 1e-12);
        assert!((m.optical(t, &x).unwrap().form() - SymForm::identity(2)).max_abs_entry() < 1e-12);
    }
    let cert = distal_cone_certificate(&m, 1.0, 10_000, 4, 1e-10).unwrap();
    assert!(cert.pass, "{}", cert.min_eigenvalue);
}

#[test]
fn identity_map_gives_minkowski() {
    let g = grid(16.0, 32);
    let id: Arc<dyn SpatialMap<f64>> = Arc::new(IdentityMap { dim: 2, center: g.center() });
    let f = MorphismSpec::scaled_diffeo(1.0, id, &g).unwrap();
    let m = distal_metric(&f, DistalProfile::new(0.7).unwrap(), &g).unwrap();
    for t in [-0.5, 0.1, 0.35, 0.6, 2.0] {
        let x = [1.0, 2.0];
        assert!((m.beta(t, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.hmetric(t, &x).unwrap() - SymForm::identity(2)).max_abs_entry() < 1e-15);
    }
    assert!(MorphismSpec::scaled_diffeo(1.5, Arc::new(ScalingMap::new(2, g.center(), 1.0).unwrap()), &g).is_err());
}

#[test]
fn easydistal_examples() {
    let mut m: Model = DistanceModel::uniform(0.0125, 800).unwrap();
    assert!(apply_easydistal(&m, 1.0).is_infinite());
    m.seed_all(2.0).unwrap();
    let b = apply_easydistal(&m, 1.0);
    assert!(b > 3.0 && b <= 3.0 + 0.0125 + 1e-12);
    let radii: Vec<f64> = (0..=90).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut m = DistanceModel::new(radii.clone()).unwrap();
    for &r in &radii {
        m.seed(r, 1.0 / r).unwrap();
    }
    // oracle: direct minimization over the grid radii above the diameter
    let direct = radii.iter().filter(|&&r| r > 1.0 + 1e-9).map(|r| r + 1.0 / r).fold(f64::INFINITY, f64::min);
    assert_eq!(apply_easydistal(&m, 1.0), direct);
    assert!((direct - 2.0).abs() < 0.01);
}

#[test]
fn bisection_examples() {
    let mut m = DistanceModel::uniform(0.0125, 400).unwrap();
    assert!(bisection_refine(&m, 1.0, 0.1, 5).is_err());
    m.seed_all(1.0).unwrap();
    let b = bisection_refine(&m, 1.0, 0.1, 5).unwrap();
    assert!((b - (2f64.powi(-32) + (1.0 - 2f64.powi(-32)) * 0.1 / 16.0)).abs() < 1e-16);
    assert!(b <= 0.00626);
    let b1 = bisection_refine(&m, 1.0, 0.1, 1).unwrap();
    assert!((b1 - (1.0 + 3.0 * 0.1) / 4.0).abs() < 1e-15);
    assert!(bisection_refine(&m, 1.0, 0.1, 0).is_err());
    let trace = refine_until(&mut m, 1.0, 1.0, 5, 1e-6, 25).unwrap();
    assert!(trace.reached && trace.history.len() <= 25, "{trace:?}");
    assert!(m.log().iter().all(|p| p.new <= p.old));
}

#[test]
fn identity_diffeo_bound() {
    let g = grid(16.0, 256);
    let id: Arc<dyn SpatialMap<f64>> = Arc::new(IdentityMap { dim: 2, center: g.center() });
    let f = MorphismSpec::scaled_diffeo(1.0, id, &g).unwrap();
    let mut model = DistanceModel::uniform(0.0125, 640).unwrap();
    model.seed_all(0.3).unwrap();
    let s = Region::ball(g, g.center(), 1.5);
    let b = apply_diffeo_bound(&model, &f, &s, 0.05, 0.8).unwrap();
    assert_eq!(b.kappa, 1.0);
    assert_eq!(b.kappa_bound, model.upper_plus(1.5));
    assert!((b.rho - 0.9).abs() <= 2.0 * g.spacing(), "{}", b.rho);
    assert!(apply_diffeo_bound(&model, &f, &s, 0.05, 0.2).is_err());
}

#[test]
fn radial_diffeo_bound_matches_radial_inverse() {
    let g = grid(16.0, 256);
    let chi = RadialBump::build(1.0, 0.5, 1.5, 5.5).unwrap();
    let f = radial_diffeo(chi, g.center(), &g).unwrap();
    let mut model = DistanceModel::uniform(0.0125, 800).unwrap();
    model.seed_all(0.2).unwrap();
    let (s0, eps, r) = (1.8, 0.05, 0.5);
    let s = Region::ball(g, g.center(), s0);
    let b = apply_diffeo_bound(&model, &f, &s, eps, r).unwrap();
    let map = RadialDiffeo::new(2, g.center(), chi);
    let exact = map.radial_inverse(map.radial(s0) + r + 2.0 * eps).unwrap() - s0;
    assert!((b.rho - exact).abs() <= 2.0 * g.spacing(), "{} vs {exact}", b.rho);
    assert!(b.kappa.is_finite() && b.kappa > 0.0);

    let annulus = Region::annulus(g, g.center(), 1.2, 2.0);
    let err = apply_diffeo_bound(&model, &f, &annulus, eps, r).unwrap_err();
    assert!(matches!(err, causalkit::Error::Precondition(_)), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bumps_satisfy_their_invariants(rstar in 0.0..2.0f64, rho1 in 0.1..1.0f64, extra in 0.1..1.5f64, room in 0.05..2.0f64) {
        let rho2 = rho1 + extra;
        let ell = 0.25 * rho2;
        let ell2 = (rho2 + ell * (1.0 - 1.8) / 2.0) / 0.9;
        let support = rstar + rho2 + 2.0 * ell + ell2 + room;
        let chi = RadialBump::build(rstar, rho1, rho2, support).unwrap();
        for i in 0..=200 {
            let u = i as f64 / 200.0;
            prop_assert_eq!(chi.value(rstar * u), 0.0);
            let r = rstar + rho1 + (rho2 - rho1) * u;
            prop_assert!((chi.value(r) - (r - rstar)).abs() <= 1e-12);
        }
        prop_assert_eq!(chi.value(support), 0.0);
        prop_assert!(chi.min_sampled_slope > -1.0);
        let h = 1e-6;
        for i in 1..2000 {
            let r = support * i as f64 / 2000.0;
            prop_assert!((chi.value(r + h) - chi.value(r - h)) / (2.0 * h) > -1.0);
        }
    }

    #[test]
    fn radial_map_sends_spheres_to_spheres(rho in 0.05..7.0f64, angle in 0.0..std::f64::consts::TAU) {
        let g = grid(16.0, 64);
        let f = RadialDiffeo::new(2, g.center(), bump());
        let d = [rho * angle.cos(), rho * angle.sin()];
        let e = f.forward_local(&d);
        let n = (e[0] * e[0] + e[1] * e[1]).sqrt();
        prop_assert!((n - (rho + f.chi.value(rho))).abs() <= 1e-10);
        // same direction, positive Jacobian determinant
        prop_assert!(e[0] * d[0] + e[1] * d[1] > 0.0);
        prop_assert!(f.jacobian_local(&d).determinant() > 0.0);
    }

    #[test]
    fn rules_never_raise_bounds(seeds in prop::collection::vec((1usize..400, 0.01..5.0f64), 1..6),
                                ops in prop::collection::vec(0u8..4, 1..8), k in 1u32..8, eps in 0.0125..0.3f64) {
        let mut m = DistanceModel::uniform(0.0125, 400).unwrap();
        for (i, v) in seeds {
            m.seed(0.0125 * i as f64, v).unwrap();
        }
        for op in ops {
            let before = m.dbar().to_vec();
            match op {
                0 => { m.propagate(); }
                1 => { m.apply_scaling(); }
                2 => { m.apply_bisection(&[eps, eps / 2.0], k).unwrap(); }
                _ => {
                    let i = 100;
                    let r = m.radii()[i];
                    let v = apply_easydistal(&m, 2.0 * r);
                    m.tighten(i, v, "easydistal", &[("diameter", 2.0 * r)]);
                }
            }
            prop_assert!(m.dbar().iter().zip(&before).all(|(a, b)| a <= b && *a >= 0.0));
        }
    }

    #[test]
    fn scaling_bound_is_exact_for_balls(lambda in 1.2..3.0f64, radius in 1.0..2.5f64, seed_r in 20usize..300, seed_v in 0.05..1.0f64) {
        let g = grid(16.0, 128);
        let map: Arc<dyn SpatialMap<f64>> = Arc::new(ScalingMap::new(2, g.center(), 1.0 / lambda).unwrap());
        let f = MorphismSpec::scaled_diffeo(lambda, map, &g).unwrap();
        let mut model = DistanceModel::uniform(0.0125, 600).unwrap();
        model.seed(0.0125 * seed_r as f64, seed_v).unwrap();
        model.propagate();
        model.apply_scaling();
        let s = Region::ball(g, g.center(), radius);
        let r = model.bound_at(radius / lambda + 0.05) + 0.5;
        prop_assume!(r.is_finite());
        let b = apply_diffeo_bound(&model, &f, &s, 0.05, r).unwrap();
        let expect = lambda * model.upper_plus(radius / lambda);
        prop_assert!((b.kappa - lambda).abs() <= 1e-12);
        prop_assert!((b.kappa_bound - expect).abs() <= 1e-12 * expect.max(1.0), "{} vs {}", b.kappa_bound, expect);
    }

    #[test]
    fn one_finite_seed_drives_everything_to_zero(seed_i in 2usize..400, value in 0.01..10.0f64, target in 1e-9..1e-3f64) {
        let mut m = DistanceModel::uniform(0.0125, 400).unwrap();
        m.set_logging(false);
        m.seed(0.0125 * seed_i as f64, value).unwrap();
        let report = drive_all_below(&mut m, target, 5, 50).unwrap();
        prop_assert!(report.reached, "{:?}", report);
        prop_assert!(m.dbar().iter().all(|&d| d < target));
    }
}

#[test]
fn cone_certificate_agrees_with_contraction_sampling() {
    let g = grid(16.0, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut valid = 0;
    for i in 0..1000 {
        let map: Arc<dyn SpatialMap<f64>> = if i % 2 == 0 {
            Arc::new(ScalingMap::new(2, g.center(), rng.gen_range(0.2..0.9)).unwrap())
        } else {
            let rstar = rng.gen_range(0.2..1.0);
            let rho1 = rng.gen_range(0.2..0.6);
            let chi = RadialBump::build(rstar, rho1, rho1 + rng.gen_range(0.2..0.8), 7.0).unwrap();
            Arc::new(RadialDiffeo::new(2, g.center(), chi))
        };
        let ray = (0..=20_000)
            .map(|j| {
                let d = [8.0 * j as f64 / 20_000.0, 0.0];
                map.jacobian_local(&d).operator_norm()
            })
            .fold(0.0, f64::max);
        let c = (1.0 / ray) * (1.0 + rng.gen_range(-0.01..0.01));
        let spec = MorphismSpec::ScaledDiffeo { c, map };
        let excess = sampled_contraction_excess(&spec, &g, 200, i).unwrap();
        match distal_metric(&spec, DistalProfile::new(1.0).unwrap(), &g) {
            Ok(metric) => {
                valid += 1;
                assert!(excess <= 1e-9, "case {i}: accepted c but sampled excess {excess}");
                let cert = distal_cone_certificate(&metric, 1.0, 200, i, 1e-10).unwrap();
                assert!(cert.pass, "case {i}: c accepted but min eigenvalue {}", cert.min_eigenvalue);
            }
            Err(_) => assert!(c * ray > 1.0 - 1e-9, "case {i}: rejected c = {c} with c·sup‖Df‖ = {}", c * ray),
        }
    }
    assert!(valid > 100);
}
