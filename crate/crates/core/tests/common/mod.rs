//! Shape generators and measurements shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use lls::curves::{min_distance, polygons_intersect, resample, surrounds, surrounds_disjoint};
use lls::evolve::{evolve_to, evolve_traced, Scheme};
use lls::{EvolvedCurve, FlowParams};
use lls::{Point, Polygon};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counter-clockwise polar curve `r(theta)` sampled at `n` angles.
pub fn polar(center: Point, n: usize, r: impl Fn(f64) -> f64) -> Polygon {
    let pts = (0..n)
        .map(|i| {
            let th = TAU * i as f64 / n as f64;
            let rr = r(th);
            Point::new(center.x + rr * th.cos(), center.y + rr * th.sin())
        })
        .collect();
    Polygon::new(pts).unwrap()
}

/// Star-shaped curve with radius in `[radius (1 - amp), radius (1 + amp)]`.
pub fn random_star(rng: &mut ChaCha8Rng, center: Point, radius: f64, amp: f64) -> Polygon {
    let modes: Vec<(f64, f64, f64)> = (2..=4)
        .map(|k| (k as f64, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU)))
        .collect();
    let norm: f64 = modes.iter().map(|m| m.1.abs()).sum::<f64>().max(1e-9);
    let n = ((TAU * radius * 3.0) as usize).max(24);
    polar(center, n, |th| {
        let s: f64 = modes.iter().map(|&(k, a, ph)| a * (k * th + ph).cos()).sum();
        radius * (1.0 + amp * s / norm)
    })
}

/// Ellipse with semi-axes `a`, `b`, rotated by `phi`.
pub fn ellipse(center: Point, a: f64, b: f64, phi: f64, n: usize) -> Polygon {
    let (c, s) = (phi.cos(), phi.sin());
    let pts = (0..n)
        .map(|i| {
            let th = TAU * i as f64 / n as f64;
            let (x, y) = (a * th.cos(), b * th.sin());
            Point::new(center.x + c * x - s * y, center.y + s * x + c * y)
        })
        .collect();
    Polygon::new(pts).unwrap()
}

/// Two nested simple curves: `(outer, inner)`, the inner one a strict
/// subset. Half are ellipses, half star-shaped.
pub fn nested_pair(rng: &mut ChaCha8Rng) -> (Polygon, Polygon) {
    let c = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let ro = rng.gen_range(8.0..14.0);
    let ri = rng.gen_range(0.3..0.55) * ro;
    let off = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (0.1 * ro);
    if rng.gen_bool(0.5) {
        let e = rng.gen_range(0.7..1.0);
        let outer = ellipse(c, ro, ro * e, rng.gen_range(0.0..TAU), 200);
        let inner = ellipse(c + off * e, ri, ri * rng.gen_range(0.7..1.0), rng.gen_range(0.0..TAU), 120);
        (outer, inner)
    } else {
        let outer = random_star(rng, c, ro, 0.12);
        let inner = random_star(rng, c + off * 0.5, ri, 0.12);
        (outer, inner)
    }
}

/// Convex hull (counter-clockwise) by the monotone chain.
pub fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    let mut hull: Vec<Point> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && (hull[hull.len() - 1] - hull[hull.len() - 2]).cross(p - hull[hull.len() - 1]) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Hull of a dozen random points in a disk of radius `r`, resampled at
/// `spacing`.
pub fn random_convex(rng: &mut ChaCha8Rng, r: f64, spacing: f64) -> Polygon {
    loop {
        let pts: Vec<Point> = (0..12)
            .map(|_| {
                let (a, d) = (rng.gen_range(0.0..TAU), r * rng.gen_range(0.3f64..1.0).sqrt());
                Point::new(d * a.cos(), d * a.sin())
            })
            .collect();
        let hull = convex_hull(pts);
        if hull.len() >= 4 {
            let p = Polygon::new(hull).unwrap();
            if p.area() > 0.8 * r * r {
                return resample(&p, spacing).unwrap();
            }
        }
    }
}

/// A peanut-like non-convex curve.
pub fn bean(radius: f64) -> Polygon {
    polar(Point::new(0.0, 0.0), 600, |th| radius * (1.0 + 0.45 * (2.0 * th).cos() + 0.15 * (3.0 * th).cos()))
}

/// Area-weighted centroid and second moments of the region bounded by `p`.
fn moments(p: &Polygon) -> (Point, [f64; 3]) {
    let v = p.vertices();
    let n = v.len();
    let c = p.centroid();
    let (mut a, mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let (p0, p1) = (v[i] - c, v[(i + 1) % n] - c);
        let cr = p0.cross(p1);
        a += cr;
        xx += cr * (p0.x * p0.x + p0.x * p1.x + p1.x * p1.x);
        yy += cr * (p0.y * p0.y + p0.y * p1.y + p1.y * p1.y);
        xy += cr * (2.0 * p0.x * p0.y + p0.x * p1.y + p1.x * p0.y + 2.0 * p1.x * p1.y);
    }
    let a = a / 2.0;
    (c, [xx / (12.0 * a), xy / (24.0 * a), yy / (12.0 * a)])
}

/// RMS relative radial deviation from a circle after the affine map that
/// turns the polygon's inertia ellipse into a circle.
pub fn ellipse_residual(p: &Polygon) -> f64 {
    let (c, [sxx, sxy, syy]) = moments(p);
    // Inverse square root of the symmetric 2x2 covariance.
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let s = det.sqrt();
    let t = (tr + 2.0 * s).sqrt();
    // sqrt(C) = (C + s I) / t, so its inverse is this.
    let (m00, m01, m11) = ((syy + s) / (s * t), -sxy / (s * t), (sxx + s) / (s * t));
    let radii: Vec<f64> = p
        .vertices()
        .iter()
        .map(|&q| {
            let d = q - c;
            Point::new(m00 * d.x + m01 * d.y, m01 * d.x + m11 * d.y).norm()
        })
        .collect();
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    (radii.iter().map(|r| (r / mean - 1.0).powi(2)).sum::<f64>() / radii.len() as f64).sqrt()
}

/// Time for a curve of area `area` to shrink to (roughly) nothing.
pub fn lifetime(area: f64, scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Cs => area / TAU,
        Scheme::As => 0.75 * (area / std::f64::consts::PI).sqrt().powf(4.0 / 3.0),
    }
}

fn advance(c: &EvolvedCurve, dt: f64, params: &FlowParams) -> EvolvedCurve {
    match c {
        EvolvedCurve::Alive(p) => evolve_to(p, dt, params).unwrap(),
        dead => dead.clone(),
    }
}

#[derive(Debug, Default)]
pub struct PairStats {
    pub checkpoints: usize,
    pub nesting_violations: usize,
    pub distance_violations: usize,
    pub strictly_increasing: usize,
    pub worst_drop: f64,
}

/// Evolves seeded nested pairs to `checkpoints` evenly spaced times before
/// the inner curve's collapse, checking nesting and the distance between
/// the two curves at each one.
pub fn nested_pair_stats(seed: u64, pairs: usize, checkpoints: usize, scheme: Scheme, spacing: f64) -> PairStats {
    let mut rng = rng(seed);
    let params = FlowParams::new(scheme, spacing);
    let slack = 1e-3 * spacing;
    let mut stats = PairStats::default();
    for _ in 0..pairs {
        let (outer, inner) = nested_pair(&mut rng);
        let (outer, inner) = (resample(&outer, spacing).unwrap(), resample(&inner, spacing).unwrap());
        let dt = 0.9 * lifetime(inner.area(), scheme) / checkpoints as f64;
        let mut dist = min_distance(&outer, &inner);
        let (mut o, mut i) = (EvolvedCurve::Alive(outer), EvolvedCurve::Alive(inner));
        for _ in 0..checkpoints {
            o = advance(&o, dt, &params);
            i = advance(&i, dt, &params);
            let Some(ip) = i.polygon() else { break };
            stats.checkpoints += 1;
            let Some(op) = o.polygon() else {
                stats.nesting_violations += 1;
                break;
            };
            if polygons_intersect(op, ip) || !surrounds_disjoint(ip, op) {
                stats.nesting_violations += 1;
                break;
            }
            let d = min_distance(op, ip);
            if d - dist < -slack {
                stats.distance_violations += 1;
            }
            if d > dist {
                stats.strictly_increasing += 1;
            }
            stats.worst_drop = stats.worst_drop.max(dist - d);
            dist = d;
        }
    }
    stats
}

#[derive(Debug, Default)]
pub struct ConvexStats {
    pub checkpoints: usize,
    pub convexity_violations: usize,
    pub shrink_violations: usize,
}

/// Random convex polygons evolved through `checkpoints` steps; each must stay
/// convex and inside both the initial curve and the previous checkpoint.
pub fn convex_stats(seed: u64, count: usize, checkpoints: usize, scheme: Scheme, spacing: f64) -> ConvexStats {
    let mut rng = rng(seed);
    let params = FlowParams::new(scheme, spacing);
    let mut stats = ConvexStats::default();
    for _ in 0..count {
        let r = rng.gen_range(6.0..12.0);
        let p0 = random_convex(&mut rng, r, spacing);
        let dt = 0.9 * lifetime(p0.area(), scheme) / checkpoints as f64;
        let mut prev = p0.clone();
        let mut c = EvolvedCurve::Alive(p0.clone());
        for _ in 0..checkpoints {
            c = advance(&c, dt, &params);
            let Some(p) = c.polygon() else { break };
            stats.checkpoints += 1;
            if !p.is_convex(1e-9) {
                stats.convexity_violations += 1;
            }
            if !surrounds(p, &p0).unwrap_or(false) || !surrounds(p, &prev).unwrap_or(false) {
                stats.shrink_violations += 1;
            }
            prev = p.clone();
        }
    }
    stats
}

/// First isoperimetric ratio at or below `target` and the area at which it
/// happened, for the bean evolved by curve shortening until it collapses.
pub fn grayson(radius: f64, spacing: f64, target: f64) -> (Option<(f64, f64)>, f64) {
    let params = FlowParams::new(Scheme::Cs, spacing);
    let p = resample(&bean(radius), spacing).unwrap();
    let mut rows = Vec::new();
    evolve_traced(&p, 10.0 * lifetime(p.area(), Scheme::Cs), &params, Some(&mut rows)).unwrap();
    let hit = rows.iter().find(|r| r.isoperimetric <= target).map(|r| (r.isoperimetric, r.area));
    (hit, params.collapse_area)
}

/// Smallest affine-normalized ellipse residual seen while the asymmetric
/// convex polygon shrinks under affine shortening, over checkpoints where it
/// still has at least `min_vertices` vertices.
pub fn affine_limit(spacing: f64, min_vertices: usize) -> (f64, usize) {
    let params = FlowParams::new(Scheme::As, spacing);
    let quad = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(24.0, 0.0), Point::new(18.0, 10.0), Point::new(3.0, 14.0)]).unwrap();
    let p0 = resample(&quad, spacing).unwrap();
    let dt = lifetime(p0.area(), Scheme::As) / 200.0;
    let mut c = EvolvedCurve::Alive(p0);
    let (mut best, mut seen) = (f64::INFINITY, 0);
    while let Some(p) = c.polygon() {
        if p.len() < min_vertices {
            break;
        }
        best = best.min(ellipse_residual(p));
        seen += 1;
        c = advance(&c, dt, &params);
    }
    (best, seen)
}
