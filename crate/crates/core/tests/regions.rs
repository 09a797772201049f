use std::sync::Arc;

use causalkit::geometry::{FormSampler, ScalarSampler, StandardSpacetime};
use causalkit::regions::{euclidean_gap, optical_signed_distance, Region};
use causalkit::*;
use proptest::prelude::*;

fn grid(cells: usize) -> Grid {
    SpatialGrid::new(2, 8.0, cells).unwrap()
}

fn constant_k(g: Grid, k: SymForm<f64>) -> Spacetime {
    let b: ScalarSampler<f64> = Arc::new(|_, _| Ok(1.0));
    let h: FormSampler<f64> = Arc::new(move |_, _| Ok(k));
    StandardSpacetime::new(g, b, h).with_static_metric(true)
}

fn form(a: f64, b: f64, theta: f64) -> SymForm<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    SymForm::new(a * c * c + b * s * s, (a - b) * c * s, a * s * s + b * c * c)
}

fn cells(g: &Grid, d: f64) -> f64 {
    d / g.spacing()
}

#[test]
fn optical_ball_examples() {
    let g = grid(128);
    let c = g.center();
    let u = Region::ball(g, c, 1.0);
    let b = optical_ball(&Spacetime::minkowski(g), 0.0, &u, 0.5).unwrap();
    assert!(hausdorff(&b, &Region::ball(g, c, 1.5)).unwrap() <= 2.0 * g.spacing());
    let b = optical_ball(&Spacetime::ultrastatic(g, 4.0), 0.0, &u, 1.0).unwrap();
    assert!(hausdorff(&b, &Region::ball(g, c, 1.5)).unwrap() <= 2.0 * g.spacing());
    let b = optical_ball(&Spacetime::minkowski(g), 0.0, &u, 0.0).unwrap();
    assert!(hausdorff(&b, &u).unwrap() <= g.spacing());
    assert!(optical_ball(&Spacetime::minkowski(g), 0.0, &u, -0.1).is_err());
}

#[test]
fn containment_examples() {
    let g = grid(64);
    let c = g.center();
    let (b1, b2) = (Region::ball(g, c, 1.0), Region::ball(g, c, 2.0));
    assert!(contains(&b2, &b1, Margin::ZERO).unwrap());
    assert!(!contains(&b1, &b2, Margin::ZERO).unwrap());
    assert!(contains(&b1, &b1, Margin::cells(2.0).unwrap()).unwrap());
    assert!(Margin::cells(-1.0).is_err());
    let other = Region::ball(grid(32), c, 1.0);
    assert!(matches!(contains(&b1, &other, Margin::ZERO), Err(Error::GridMismatch)));
}

#[test]
fn hausdorff_examples() {
    let g = grid(128);
    let c = g.center();
    let b = Region::ball(g, c, 1.0);
    assert_eq!(hausdorff(&b, &b).unwrap(), 0.0);
    let d = hausdorff(&b, &Region::ball(g, c, 1.5)).unwrap();
    assert!((d - 0.5).abs() <= 2.0 * g.spacing(), "{d}");
    let grown = b.dilate(g.spacing()).unwrap();
    assert!(hausdorff(&b, &grown).unwrap() <= 2.0 * g.spacing());
    assert!(hausdorff(&b, &Region::empty(g)).is_err());
}

#[test]
fn emptiness_tracks_the_maximum() {
    let g = grid(32);
    assert!(Region::empty(g).is_empty());
    assert!(Region::empty(g).max_sdf() <= 0.0);
    let tiny = Region::ball(g, [0.1, 0.1], 0.05);
    assert_eq!(tiny.is_empty(), tiny.max_sdf() <= 0.0);
    assert!(!Region::whole(g).has_exterior(Margin::ZERO));
    assert!(Region::ball(g, g.center(), 1.0).has_exterior(Margin::cells(2.0).unwrap()));
}

#[test]
fn set_operations_and_gaps() {
    let g = grid(128);
    let c = g.center();
    let (a, b) = (Region::ball(g, c, 1.0), Region::ball(g, [c[0] + 1.0, c[1]], 1.0));
    let u = a.union(&b).unwrap();
    let i = a.intersection(&b).unwrap();
    assert!(contains(&u, &a, Margin::ZERO).unwrap() && contains(&u, &b, Margin::ZERO).unwrap());
    assert!(contains(&a, &i, Margin::ZERO).unwrap() && contains(&b, &i, Margin::ZERO).unwrap());
    let comp = a.complement();
    assert!(a.sdf().iter().zip(comp.sdf()).all(|(x, y)| *x == -*y));
    let gap = euclidean_gap(&Region::ball(g, c, 1.0), &Region::ball(g, c, 2.0)).unwrap();
    assert!((gap - 1.0).abs() <= 2.0 * g.spacing(), "{gap}");
    let r = Region::ball(g, c, 1.3).inradius().unwrap();
    assert!((r - 1.3).abs() <= 2.0 * g.spacing(), "{r}");
}

#[test]
fn redistanced_fields_are_lipschitz() {
    let g = grid(64);
    let c = g.center();
    let r = Region::axis_box(g, c, [1.0, 0.6]).union(&Region::ball(g, [c[0] + 1.5, c[1]], 0.7)).unwrap();
    let d = r.redistance().unwrap();
    let h = g.spacing();
    for i in 0..g.len() {
        for axis in 0..2 {
            let j = g.neighbor(i, axis, true);
            assert!((d.sdf()[i] - d.sdf()[j]).abs() <= h + 2.0 * h);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn constant_metric_balls_compose(a in 0.5..3.0f64, b in 0.5..3.0f64, th in 0.0..std::f64::consts::PI,
                                     r0 in 0.4..0.9f64, r1 in 0.1..0.5f64, r2 in 0.1..0.5f64) {
        let g = grid(64);
        let m = constant_k(g, form(a, b, th));
        let u = Region::ball(g, g.center(), r0);
        let two = optical_ball(&m, 0.0, &optical_ball(&m, 0.0, &u, r1).unwrap(), r2).unwrap();
        let one = optical_ball(&m, 0.0, &u, r1 + r2).unwrap();
        prop_assert!(cells(&g, hausdorff(&two, &one).unwrap()) <= 3.0);
    }

    #[test]
    fn composed_balls_cover_the_single_ball(r1 in 0.1..0.5f64, r2 in 0.1..0.5f64, x in 3.0..5.0f64) {
        let g = grid(64);
        let m = StandardSpacetime::from_expressions(g, "1", &["1 + 0.5*sin(pi*x1/4)^2", "0.2*cos(pi*x2/4)", "1.5"]).unwrap();
        let u = Region::ball(g, [x, 4.0], 0.6);
        let two = optical_ball(&m, 0.0, &optical_ball(&m, 0.0, &u, r1).unwrap(), r2).unwrap();
        let one = optical_ball(&m, 0.0, &u, r1 + r2).unwrap();
        prop_assert!(containment_margin(&two, &one).unwrap() >= -2.0);
    }

    #[test]
    fn optical_balls_are_monotone(dx in -1.0..1.0f64, dy in -1.0..1.0f64, grow in 0.0..0.6f64, delta in 0.0..0.8f64) {
        let g = grid(64);
        let c = g.center();
        let m = StandardSpacetime::from_expressions(g, "1 + 0.3*cos(pi*x1/4)", &["1", "0", "2 + sin(pi*x2/4)"]).unwrap();
        let u = Region::axis_box(g, [c[0] + dx, c[1] + dy], [0.5, 0.8]);
        let v = u.dilate(grow).unwrap().union(&Region::ball(g, c, 0.5)).unwrap();
        let bu = optical_ball(&m, 0.0, &u, delta).unwrap();
        let bv = optical_ball(&m, 0.0, &v, delta).unwrap();
        prop_assert!(contains(&bv, &bu, Margin::ZERO).unwrap());
    }

    #[test]
    fn fast_marching_matches_constant_metric_distance(a in 0.3..3.0f64, b in 0.3..3.0f64, th in 0.0..std::f64::consts::PI,
                                                      cx in 3.5..4.5f64, cy in 3.5..4.5f64, r in 0.4..0.8f64) {
        let g = grid(64);
        let k = form(a, b, th);
        let m = constant_k(g, k);
        let ctr = [cx, cy];
        let knorm = |p: &Point| {
            let d = g.displacement(&ctr, p);
            k.quad(&d).sqrt()
        };
        // a k-ball, so the exact optical signed distance is r − ‖x − c‖_k
        let seed = Region::from_sdf(g, (0..g.len()).map(|i| r - knorm(&g.point(i))).collect()).unwrap();
        let d = optical_signed_distance(&m, 0.0, &seed).unwrap();
        let scale = k.max_eigenvalue().sqrt();
        let mut worst: f64 = 0.0;
        for (i, di) in d.iter().enumerate() {
            let exact = r - knorm(&g.point(i));
            if exact.abs() <= 1.5 {
                worst = worst.max((di - exact).abs());
            }
        }
        prop_assert!(worst <= 2.0 * g.spacing() * scale, "worst {} vs {}", worst, 2.0 * g.spacing() * scale);
    }
}
