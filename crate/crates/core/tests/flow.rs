mod common;

use lls::curves::{hausdorff_distance, resample, surrounds};
use lls::evolve::{evolve_family, evolve_to, Scheme};
use lls::{EvolvedCurve, FlowParams, Point, Polygon};

fn mean_radius(p: &Polygon) -> f64 {
    let c = p.centroid();
    p.vertices().iter().map(|q| q.dist(c)).sum::<f64>() / p.len() as f64
}

#[test]
fn nested_circles_keep_their_radii_and_order() {
    let o = Point::new(0.0, 0.0);
    let params = FlowParams::new(Scheme::Cs, 0.1);
    let curves = [Polygon::regular(o, 10.0, 700, 0.0), Polygon::regular(o, 5.0, 350, 0.0)];
    let out = evolve_family(&curves, 10.0, &params).unwrap();
    let (outer, inner) = (out[0].polygon().unwrap(), out[1].polygon().unwrap());
    assert!((mean_radius(outer) - 80f64.sqrt()).abs() < 0.05);
    assert!((mean_radius(inner) - 5f64.sqrt()).abs() < 0.05);
    assert!(surrounds(inner, outer).unwrap());
}

#[test]
fn inclusion_and_distance_under_both_schemes() {
    for scheme in [Scheme::Cs, Scheme::As] {
        let s = common::nested_pair_stats(7, 12, 6, scheme, 0.25);
        assert_eq!(s.nesting_violations, 0, "{scheme:?}: {s:?}");
        assert_eq!(s.distance_violations, 0, "{scheme:?}: {s:?}");
        assert!(s.checkpoints >= 60, "{scheme:?}: {s:?}");
    }
}

#[test]
fn convex_curves_stay_convex_and_shrink() {
    for scheme in [Scheme::Cs, Scheme::As] {
        let s = common::convex_stats(11, 8, 6, scheme, 0.25);
        assert_eq!(s.convexity_violations, 0, "{scheme:?}: {s:?}");
        assert_eq!(s.shrink_violations, 0, "{scheme:?}: {s:?}");
    }
}

#[test]
fn bean_rounds_out_before_vanishing() {
    let (hit, a_min) = common::grayson(6.0, 0.2, 1.01);
    let (_, area) = hit.expect("ratio reaches 1.01");
    assert!(area >= 4.0 * a_min);
}

#[test]
fn affine_shortening_approaches_an_ellipse() {
    let (best, _) = common::affine_limit(0.2, 48);
    assert!(best <= 0.02, "{best}");
}

#[test]
fn affine_collapse_time_of_a_circle() {
    let params = FlowParams::new(Scheme::As, 0.1);
    let r: f64 = 8.0;
    let exact = 0.75 * r.powf(4.0 / 3.0);
    match evolve_to(&Polygon::regular(Point::new(0.0, 0.0), r, 500, 0.0), 100.0, &params).unwrap() {
        EvolvedCurve::Collapsed { time, .. } => assert!((time - exact).abs() < 0.05 * exact, "{time} vs {exact}"),
        EvolvedCurve::Alive(_) => panic!("circle survived"),
    }
}

#[test]
fn affine_shortening_commutes_with_shear() {
    let params = FlowParams::new(Scheme::As, 0.1);
    let shear = |q: Point| Point::new(q.x + 0.5 * q.y, q.y);
    let e = resample(&common::ellipse(Point::new(0.0, 0.0), 10.0, 6.0, 0.3, 400), 0.1).unwrap();
    let t = 4.0;
    let a = evolve_to(&e.map_points(shear).unwrap(), t, &params).unwrap();
    let b = evolve_to(&e, t, &params).unwrap();
    let b = b.polygon().unwrap().map_points(shear).unwrap();
    let d = hausdorff_distance(a.polygon().unwrap(), &b);
    assert!(d < 0.1, "{d}");
}

#[test]
fn curve_shortening_is_rotation_invariant() {
    let params = FlowParams::new(Scheme::Cs, 0.1);
    let p = common::random_star(&mut common::rng(3), Point::new(0.0, 0.0), 6.0, 0.2);
    let rot = |q: Point| Point::new(-q.y, q.x);
    let a = evolve_to(&p.map_points(rot).unwrap(), 3.0, &params).unwrap();
    let b = evolve_to(&p, 3.0, &params).unwrap().polygon().unwrap().map_points(rot).unwrap();
    assert!(hausdorff_distance(a.polygon().unwrap(), &b) < 0.05);
}
