use std::sync::Arc;

use causalkit::deform::{CauchyChain, InterpolationTimes};
use causalkit::geometry::{FormSampler, ScalarSampler, StandardSpacetime};
use causalkit::regions::Region;
use causalkit::*;
use proptest::prelude::*;

fn grid(period: f64, cells: usize) -> Grid {
    SpatialGrid::new(2, period, cells).unwrap()
}

fn times() -> Times {
    InterpolationTimes::new(0.0, 0.2, 0.4, 0.6).unwrap()
}

#[test]
fn times_must_be_ordered() {
    assert!(InterpolationTimes::new(0.0, 0.3, 0.2, 0.6).is_err());
    assert!(InterpolationTimes::new(0.0, 0.0, 0.2, 0.6).is_err());
    let t = InterpolationTimes::around(0.0, 0.3, 0.9).unwrap();
    assert!(t.t1 < t.t1p && t.t1p < 0.3 && 0.3 < t.t2p && t.t2p < t.t2 && t.t2 < 0.9);
}

#[test]
fn self_interpolation_keeps_minkowski_outside() {
    let g = grid(8.0, 32);
    let m = Spacetime::minkowski(g);
    let i = interpolate(&m, &m, times()).unwrap();
    for t in [-1.0, 0.0, 0.6, 2.0] {
        assert_eq!(i.optical(t, &[1.0, 2.0]).unwrap().form(), SymForm::identity(2));
    }
    for t in [0.1, 0.3, 0.5] {
        let k = i.optical(t, &[1.0, 2.0]).unwrap().form();
        assert!(k.xy() == 0.0 && k.xx() == k.yy() && k.xx() >= 1.0);
    }
    let r = verify_interpolation(&i, &m, &m, times(), 3000, 1).unwrap();
    assert!(r.all_pass && r.endpoint_failures == 0);
}

#[test]
fn past_samplers_are_bit_identical() {
    let g = grid(8.0, 32);
    let m1 = Spacetime::exponential_scale(g, 0.5);
    let m2 = Spacetime::ultrastatic(g, 4.0);
    let i = interpolate(&m1, &m2, times()).unwrap();
    for t in [-2.0, -0.5, 0.0] {
        let x = [0.3, 7.1];
        assert_eq!(i.beta(t, &x).unwrap(), m1.beta(t, &x).unwrap());
        assert_eq!(i.hmetric(t, &x).unwrap(), m1.hmetric(t, &x).unwrap());
    }
}

#[test]
fn middle_slab_adds_optical_forms() {
    let g = grid(8.0, 32);
    let m1 = Spacetime::minkowski(g);
    let m2 = Spacetime::ultrastatic(g, 4.0);
    let i = interpolate(&m1, &m2, times()).unwrap();
    for t in [0.25, 0.3, 0.35] {
        let x = [2.0, 5.0];
        let k = i.optical(t, &x).unwrap().form();
        assert!((k - SymForm::scaled_identity(2, 5.0)).max_abs_entry() < 1e-12);
        // oracle: eigenvalues of k_g − k_i are 4 and 1
        assert!((cone_margin(&i, &m1, t, &x).unwrap() - 4.0).abs() < 1e-12);
        assert!((cone_margin(&i, &m2, t, &x).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn widened_cones_are_reported() {
    let g = grid(8.0, 32);
    let m1 = Spacetime::minkowski(g);
    let tm = times();
    let beta: ScalarSampler<f64> = Arc::new(|_, _| Ok(1.0));
    let h: FormSampler<f64> =
        Arc::new(move |t, _| Ok(SymForm::scaled_identity(2, if t > tm.t1p && t < tm.t2p { 0.5 } else { 1.0 })));
    let bad = StandardSpacetime::new(g, beta, h);
    let r = verify_interpolation(&bad, &m1, &m1, tm, 3000, 2).unwrap();
    assert!(!r.all_pass);
    assert!(r.cone_failures > 0);
    assert!(r.first_failure.is_some());
}

#[test]
fn cauchy_chain_shape() {
    let chain = CauchyChain::<f64>::interpolating(times()).unwrap();
    assert_eq!(chain.links.len(), 4);
    let d = chain.describe();
    assert!(d[0].starts_with("M <- P") && d[1].starts_with("P -> I") && d[2].starts_with("I <- F") && d[3].starts_with("F -> N"));
    let g = grid(8.0, 32);
    let p = Pair::new(-0.5, Region::ball(g, g.center(), 1.0), Region::ball(g, g.center(), 2.0));
    assert_eq!(chain.carry_to_interpolating(&p, false).unwrap().t, -0.5);
    assert!(chain.carry_to_interpolating(&p, true).is_err());
}

fn ball_pair(g: Grid, r_in: f64, r_out: f64, dx: f64) -> Pair {
    let c = g.center();
    Pair::regular(0.0, Region::ball(g, [c[0] + dx, c[1]], r_in), Region::ball(g, [c[0] + dx, c[1]], r_out)).unwrap()
}

#[test]
fn split_chain_minkowski_to_constant_metric() {
    let g = grid(12.0, 256);
    let (m, n) = (Spacetime::minkowski(g), Spacetime::ultrastatic(g, 4.0));
    let r = verify_theorem_chain(&m, &n, &[ball_pair(g, 1.0, 2.0, 0.0)], ChainMode::Split, &ChainOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures);
    assert!(r.t_m < r.times.t1 && r.times.t2p < r.times.t2 && r.times.t2 < r.t_n);
    assert!(r.times.t1p < r.t_star && r.t_star < r.times.t2p);
    assert_eq!(r.cauchy_chain.len(), 4);
}

#[test]
fn degenerate_deformation_passes() {
    let g = grid(12.0, 256);
    let m = Spacetime::minkowski(g);
    let r = verify_theorem_chain(&m, &m, &[ball_pair(g, 1.0, 2.0, 0.0)], ChainMode::Split, &ChainOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures);
    assert_eq!(r.interpolation.endpoint_failures, 0);
}

#[test]
fn several_pairs_in_both_modes() {
    let g = grid(12.0, 256);
    let (m, n) = (Spacetime::minkowski(g), Spacetime::ultrastatic(g, 4.0));
    let pairs = [ball_pair(g, 0.8, 1.8, -3.0), ball_pair(g, 0.7, 1.7, 3.0)];
    let r = verify_theorem_chain(&m, &n, &pairs, ChainMode::Both, &ChainOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures);
    assert_eq!(r.chains.len(), 4);
    for i in 0..2 {
        let kinds: Vec<_> = r.chains.iter().filter(|c| c.pair_index == i).map(|c| c.kind).collect();
        assert_eq!(kinds, ["split", "rs"]);
    }
}

#[test]
fn weak_distal_chain() {
    let g = grid(12.0, 256);
    let (m, n) = (Spacetime::minkowski(g), Spacetime::ultrastatic(g, 2.0));
    let r = verify_theorem_chain(&m, &n, &[ball_pair(g, 1.0, 2.4, 0.0)], ChainMode::WeakDistal, &ChainOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures);
    let c = &r.chains[0];
    assert_eq!(c.offsets.len(), 6);
    assert!(c.links.iter().any(|l| l.spacetime == "N"));
}

#[test]
fn both_mode_implies_each_single_mode() {
    let g = grid(12.0, 256);
    let (m, n) = (Spacetime::exponential_scale(g, 0.3), Spacetime::ultrastatic(g, 3.0));
    let pairs = [ball_pair(g, 1.1, 2.2, 0.3)];
    let opts = ChainOptions::default();
    let both = verify_theorem_chain(&m, &n, &pairs, ChainMode::Both, &opts).unwrap();
    assert!(both.passed, "{:?}", both.failures);
    for mode in [ChainMode::Split, ChainMode::Rs] {
        let single = verify_theorem_chain(&m, &n, &pairs, mode, &opts).unwrap();
        assert!(single.passed, "{mode:?}: {:?}", single.failures);
    }
}

#[test]
fn orderings_in_the_past_metric_carry_over() {
    let g = grid(12.0, 128);
    let (m1, m2) = (Spacetime::minkowski(g), Spacetime::ultrastatic(g, 4.0));
    let tm = InterpolationTimes::around(0.0, 0.1, 0.2).unwrap();
    let i = interpolate(&m1, &m2, tm).unwrap();
    let c = g.center();
    let margin = Margin::cells(2.0).unwrap();
    let t_late = tm.t2p - 1e-3;
    let p1 = Pair::new(-0.3, Region::ball(g, c, 1.6), Region::ball(g, c, 2.2));
    let p2 = Pair::new(t_late, Region::ball(g, c, 1.0), Region::ball(g, c, 3.0));
    assert!(precedes(&p1, &p2, &m1, margin).unwrap());
    assert!(precedes(&p1, &p2, &i, margin).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn endpoints_match_to_relative_precision(rate in -1.0..1.0f64, k in 0.5..4.0f64, t in -3.0..3.0f64,
                                             x in 0.0..8.0f64, y in 0.0..8.0f64) {
        let g = grid(8.0, 32);
        let m1 = Spacetime::exponential_scale(g, rate);
        let m2 = StandardSpacetime::from_expressions(g, "1 + 0.2*sin(pi*x1/4) + 0.1*t^2", &[&format!("{k}"), "0.1", "2"]).unwrap();
        let tm = times();
        let i = interpolate(&m1, &m2, tm).unwrap();
        let p = [x, y];
        let reference = if t <= tm.t1 { Some(&m1) } else if t >= tm.t2 { Some(&m2) } else { None };
        if let Some(r) = reference {
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
            prop_assert!(rel(i.beta(t, &p).unwrap(), r.beta(t, &p).unwrap()) <= 1e-12);
            let (a, b) = (i.hmetric(t, &p).unwrap(), r.hmetric(t, &p).unwrap());
            prop_assert!((a - b).max_abs_entry() <= 1e-12 * b.max_abs_entry());
        } else {
            if t < tm.t2p {
                prop_assert!(cone_contained(&i, &m1, t, &p, PARSED_CONE_TOL).unwrap());
            }
            if t > tm.t1p {
                prop_assert!(cone_contained(&i, &m2, t, &p, PARSED_CONE_TOL).unwrap());
            }
        }
    }
}
