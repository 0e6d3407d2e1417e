//! Geometry kernel for discrete Jordan curves.
//!
//! A [`Polygon`] stores an open vertex list; the closing edge from the last
//! vertex back to the first is implicit.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2-D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Rotation by +90 degrees.
    #[inline]
    pub fn perp(self) -> Self {
        Point::new(-self.y, self.x)
    }

    #[inline]
    pub fn lerp(self, o: Self, s: T) -> Self {
        self + (o - self) * s
    }

    pub fn cast<U: Real>(self) -> Point<U> {
        Point::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Point::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Neg for Point<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Point::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Real> BBox<T> {
    pub fn of(points: &[Point<T>]) -> Self {
        let mut b = BBox {
            min: Point::new(T::infinity(), T::infinity()),
            max: Point::new(T::neg_infinity(), T::neg_infinity()),
        };
        for &p in points {
            b.include(p);
        }
        b
    }

    #[inline]
    fn include(&mut self, p: Point<T>) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    #[inline]
    pub fn contains(&self, p: Point<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Lower bound on the distance between anything inside the two boxes.
    #[inline]
    pub fn distance(&self, o: &Self) -> T {
        let dx = (o.min.x - self.max.x).max(self.min.x - o.max.x).max(T::zero());
        let dy = (o.min.y - self.max.y).max(self.min.y - o.max.y).max(T::zero());
        (dx * dx + dy * dy).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Orientation::Ccw => T::one(),
            Orientation::Cw => -T::one(),
        }
    }
}

/// Cyclic successor of `i` in `0..n`.
#[inline]
pub(crate) fn next(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}

/// Cyclic predecessor of `i` in `0..n`.
#[inline]
pub(crate) fn prev(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

/// Closed polygon with cached signed area and perimeter.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon<T> {
    vertices: Vec<Point<T>>,
    signed_area: T,
    length: T,
}

impl<T: Real> Polygon<T> {
    pub fn new(vertices: Vec<Point<T>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!("polygon needs at least 3 vertices, got {}", vertices.len())));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Numerical("polygon vertex is not finite".into()));
        }
        Ok(Self::from_vertices_unchecked(vertices))
    }

    pub(crate) fn from_vertices_unchecked(vertices: Vec<Point<T>>) -> Self {
        let n = vertices.len();
        let mut twice_area = T::zero();
        let mut length = T::zero();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[next(i, n)];
            twice_area += a.cross(b);
            length += a.dist(b);
        }
        Polygon { vertices, signed_area: twice_area * T::lit(0.5), length }
    }

    /// Regular `n`-gon, counter-clockwise, first vertex at angle `phase`.
    pub fn regular(center: Point<T>, radius: T, n: usize, phase: T) -> Self {
        let step = T::TAU() / T::lit(n as f64);
        let vertices = (0..n)
            .map(|k| {
                let a = phase + step * T::lit(k as f64);
                Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect();
        Self::from_vertices_unchecked(vertices)
    }

    #[inline]
    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point<T>> {
        self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    #[inline]
    pub fn signed_area(&self) -> T {
        self.signed_area
    }

    #[inline]
    pub fn area(&self) -> T {
        self.signed_area.abs()
    }

    #[inline]
    pub fn length(&self) -> T {
        self.length
    }

    pub fn orientation(&self) -> Orientation {
        if self.signed_area > T::zero() {
            Orientation::Ccw
        } else {
            Orientation::Cw
        }
    }

    /// `L^2 / (4 pi A)`; 1 for a circle.
    pub fn isoperimetric_ratio(&self) -> T {
        self.length * self.length / (T::lit(4.0) * T::PI() * self.area())
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point<T> {
        let n = self.len();
        let (mut cx, mut cy, mut a2) = (T::zero(), T::zero(), T::zero());
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[next(i, n)];
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
            a2 += c;
        }
        if a2 == T::zero() {
            let s = T::lit(n as f64);
            let sum = self.vertices.iter().fold(Point::new(T::zero(), T::zero()), |acc, &p| acc + p);
            return Point::new(sum.x / s, sum.y / s);
        }
        let k = T::lit(3.0) * a2;
        Point::new(cx / k, cy / k)
    }

    pub fn bbox(&self) -> BBox<T> {
        BBox::of(&self.vertices)
    }

    #[inline]
    pub fn edge(&self, i: usize) -> (Point<T>, Point<T>) {
        (self.vertices[i], self.vertices[next(i, self.len())])
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self::from_vertices_unchecked(v)
    }

    /// Applies a point map (e.g. an affine transform) to every vertex.
    pub fn map_points(&self, f: impl Fn(Point<T>) -> Point<T>) -> Result<Self> {
        Self::new(self.vertices.iter().map(|&p| f(p)).collect())
    }

    /// Even-odd containment; points on the boundary are unspecified.
    pub fn contains_point(&self, p: Point<T>) -> bool {
        let n = self.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Every turn has the same sign (up to `tol` times the edge lengths).
    pub fn is_convex(&self, tol: T) -> bool {
        let s = self.orientation().sign::<T>();
        let n = self.len();
        (0..n).all(|i| {
            let a = self.vertices[prev(i, n)];
            let b = self.vertices[i];
            let c = self.vertices[next(i, n)];
            let (u, v) = (b - a, c - b);
            s * u.cross(v) >= -tol * u.norm() * v.norm()
        })
    }

    pub fn cast<U: Real>(&self) -> Polygon<U> {
        Polygon::from_vertices_unchecked(self.vertices.iter().map(|p| p.cast()).collect())
    }
}

/// Shoelace area; positive for counter-clockwise polygons.
pub fn signed_area<T: Real>(poly: &Polygon<T>) -> T {
    poly.signed_area()
}

#[inline]
fn orient<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    (b - a).cross(c - a)
}

#[inline]
fn on_segment<T: Real>(a: Point<T>, b: Point<T>, p: Point<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect<T: Real>(p1: Point<T>, p2: Point<T>, q1: Point<T>, q2: Point<T>) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    (d1 == z && on_segment(q1, q2, p1))
        || (d2 == z && on_segment(q1, q2, p2))
        || (d3 == z && on_segment(p1, p2, q1))
        || (d4 == z && on_segment(p1, p2, q2))
}

pub fn point_segment_distance<T: Real>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == T::zero() {
        return p.dist(a);
    }
    let s = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.dist(a + ab * s)
}

pub fn segment_distance<T: Real>(p1: Point<T>, p2: Point<T>, q1: Point<T>, q2: Point<T>) -> T {
    if segments_intersect(p1, p2, q1, q2) {
        return T::zero();
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

const CHUNK: usize = 16;

/// Bounding boxes of runs of `CHUNK` consecutive edges.
fn edge_chunks<T: Real>(poly: &Polygon<T>) -> Vec<(usize, usize, BBox<T>)> {
    let n = poly.len();
    let v = poly.vertices();
    (0..n)
        .step_by(CHUNK)
        .map(|s| {
            let e = (s + CHUNK).min(n);
            let mut b = BBox::of(&v[s..e]);
            b.include(v[e % n]);
            (s, e, b)
        })
        .collect()
}

/// Minimum Euclidean distance between the two closed polylines; zero when
/// they touch or cross.
pub fn min_distance<T: Real>(a: &Polygon<T>, b: &Polygon<T>) -> T {
    let ca = edge_chunks(a);
    let cb = edge_chunks(b);
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(ca.len() * cb.len());
    for (i, x) in ca.iter().enumerate() {
        for (j, y) in cb.iter().enumerate() {
            pairs.push((x.2.distance(&y.2), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut best = T::infinity();
    for (lb, i, j) in pairs {
        if lb >= best {
            break;
        }
        let (sa, ea, _) = ca[i];
        let (sb, eb, _) = cb[j];
        for ia in sa..ea {
            let (p1, p2) = a.edge(ia);
            for ib in sb..eb {
                let (q1, q2) = b.edge(ib);
                best = best.min(segment_distance(p1, p2, q1, q2));
            }
        }
        if best == T::zero() {
            break;
        }
    }
    best
}

/// True when the boundaries of `a` and `b` share at least one point.
pub fn polygons_intersect<T: Real>(a: &Polygon<T>, b: &Polygon<T>) -> bool {
    let ca = edge_chunks(a);
    let cb = edge_chunks(b);
    for &(sa, ea, ba) in &ca {
        for &(sb, eb, bb) in &cb {
            if ba.distance(&bb) > T::zero() {
                continue;
            }
            for ia in sa..ea {
                let (p1, p2) = a.edge(ia);
                for ib in sb..eb {
                    let (q1, q2) = b.edge(ib);
                    if segments_intersect(p1, p2, q1, q2) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// The partial order on Jordan curves: `surrounds(a, b)` holds iff
/// `Int(a) ⊆ Int(b)`.
///
/// The name follows the classical definition, which reads backwards from
/// everyday usage: the *first* argument is the inner curve. For disjoint
/// simple curves one vertex of `a` strictly inside `b` decides the question.
pub fn surrounds<T: Real>(a: &Polygon<T>, b: &Polygon<T>) -> Result<bool> {
    if polygons_intersect(a, b) {
        return Err(Error::Geometry("surrounds: polygons intersect".into()));
    }
    Ok(surrounds_disjoint(a, b))
}

/// [`surrounds`] without the intersection check; callers guarantee disjointness.
pub fn surrounds_disjoint<T: Real>(a: &Polygon<T>, b: &Polygon<T>) -> bool {
    let p = a.vertices()[0];
    b.bbox().contains(p) && b.contains_point(p)
}

/// Signed Menger curvature at vertex `i`: the inverse circumradius of
/// `(v[i-1], v[i], v[i+1])`, positive where the curve bends toward its interior.
/// Collinear triples give zero.
pub fn curvature_at<T: Real>(poly: &Polygon<T>, i: usize) -> T {
    let n = poly.len();
    let v = poly.vertices();
    let k = menger(v[prev(i, n)], v[i], v[next(i, n)]);
    k * poly.orientation().sign::<T>()
}

/// Menger curvature of a triple, positive for a left turn.
#[inline]
pub(crate) fn menger<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    let u = b - a;
    let w = c - b;
    let denom = u.norm() * w.norm() * (c - a).norm();
    if denom == T::zero() {
        return T::zero();
    }
    let k = T::lit(2.0) * u.cross(w) / denom;
    if k.abs() < T::curvature_floor() {
        T::zero()
    } else {
        k
    }
}

/// Uniform arc-length resampling with `max(ceil(L / spacing), 3)` vertices,
/// starting at the first vertex. New vertices lie on the input polyline.
pub fn resample<T: Real>(poly: &Polygon<T>, spacing: T) -> Result<Polygon<T>> {
    if !(spacing > T::zero()) {
        return Err(Error::Parameter(format!("resample spacing must be positive, got {spacing}")));
    }
    let count = (poly.length() / spacing).ceil().to_usize().unwrap_or(3).max(3);
    Polygon::new(resample_count(poly, count))
}

fn resample_count<T: Real>(poly: &Polygon<T>, count: usize) -> Vec<Point<T>> {
    let n = poly.len();
    let step = poly.length() / T::lit(count as f64);
    let mut out = Vec::with_capacity(count);
    let mut edge = 0;
    let mut edge_start = T::zero();
    let (mut a, mut b) = poly.edge(0);
    let mut edge_len = a.dist(b);
    for k in 0..count {
        let s = step * T::lit(k as f64);
        while s > edge_start + edge_len && edge + 1 < n {
            edge_start += edge_len;
            edge += 1;
            (a, b) = poly.edge(edge);
            edge_len = a.dist(b);
        }
        let f = if edge_len > T::zero() { ((s - edge_start) / edge_len).min(T::one()) } else { T::zero() };
        out.push(a.lerp(b, f));
    }
    out
}

/// Local remeshing that keeps every edge within `[spacing/2, spacing]`.
///
/// Vertices closer than `spacing/2` to the previous kept vertex are dropped
/// and long edges are split at equal intervals, so untouched stretches keep
/// their exact positions. Returns `None` when no edge is out of range.
pub fn remesh<T: Real>(poly: &Polygon<T>, spacing: T, min_vertices: usize) -> Option<Polygon<T>> {
    remesh_tracked(poly, spacing, min_vertices).map(|(p, _)| p)
}

/// [`remesh`] plus an upper bound on the distance from any point of the
/// new polygon to the old one (infinite after a full resample).
pub(crate) fn remesh_tracked<T: Real>(poly: &Polygon<T>, spacing: T, min_vertices: usize) -> Option<(Polygon<T>, T)> {
    let half = spacing * T::lit(0.5);
    let n = poly.len();
    let v = poly.vertices();
    let in_range = (0..n).all(|i| {
        let d = v[i].dist(v[next(i, n)]);
        d >= half && d <= spacing
    });
    if in_range {
        return None;
    }
    let floor = min_vertices.max(3);
    if poly.length() < spacing * T::lit(min_vertices as f64) {
        if n == floor {
            return None;
        }
        return Some((Polygon::from_vertices_unchecked(resample_count(poly, floor)), T::infinity()));
    }
    let mut kept: Vec<usize> = Vec::with_capacity(n);
    kept.push(0);
    for i in 1..n {
        if v[i].dist(v[*kept.last().unwrap()]) >= half {
            kept.push(i);
        }
    }
    while kept.len() > 3 && v[*kept.last().unwrap()].dist(v[0]) < half {
        kept.pop();
    }
    let m = kept.len();
    let mut shift = T::zero();
    let mut out = Vec::with_capacity(m + m / 2);
    for k in 0..m {
        let (ia, ib) = (kept[k], kept[(k + 1) % m]);
        let (a, b) = (v[ia], v[ib]);
        let mut j = next(ia, n);
        while j != ib {
            shift = shift.max(point_segment_distance(v[j], a, b));
            j = next(j, n);
        }
        out.push(a);
        let d = a.dist(b);
        if d > spacing {
            let pieces = (d / spacing).ceil().to_usize().unwrap_or(1);
            for k in 1..pieces {
                out.push(a.lerp(b, T::lit(k as f64) / T::lit(pieces as f64)));
            }
        }
    }
    if out.len() < floor {
        let p = Polygon::from_vertices_unchecked(out);
        return Some((Polygon::from_vertices_unchecked(resample_count(&p, floor)), T::infinity()));
    }
    Some((Polygon::from_vertices_unchecked(out), shift))
}

/// Smallest distance between two edges that share no vertex, capped at `cap`.
///
/// Zero means the polygon is not simple. Edges are bucketed by midpoint on a
/// grid with cells at least `max_edge + cap` wide, so each edge only meets
/// the edges of its 3x3 cell neighbourhood; linear for well-spaced polygons.
pub fn min_nonadjacent_gap<T: Real>(poly: &Polygon<T>, cap: T) -> T {
    let n = poly.len();
    if n < 4 {
        return cap;
    }
    let v = poly.vertices();
    let max_edge = (0..n).map(|i| v[i].dist(v[next(i, n)])).fold(T::zero(), T::max);
    let cell = (max_edge + cap).max(T::min_positive_value());
    let half = T::lit(0.5);
    let key = |p: Point<T>| {
        ((p.x / cell).floor().to_i64().unwrap_or(0), (p.y / cell).floor().to_i64().unwrap_or(0))
    };
    let mut items: Vec<((i64, i64), u32)> =
        (0..n).map(|i| (key((v[i] + v[next(i, n)]) * half), i as u32)).collect();
    items.sort_unstable();
    let find = |k: (i64, i64)| {
        let lo = items.partition_point(|e| e.0 < k);
        let hi = lo + items[lo..].partition_point(|e| e.0 == k);
        &items[lo..hi]
    };
    let mut best = cap;
    let mut start = 0;
    while start < items.len() {
        let k = items[start].0;
        let end = start + items[start..].partition_point(|e| e.0 == k);
        for &(_, i) in &items[start..end] {
            let i = i as usize;
            let (p1, p2) = poly.edge(i);
            let (pminx, pmaxx) = (p1.x.min(p2.x), p1.x.max(p2.x));
            let (pminy, pmaxy) = (p1.y.min(p2.y), p1.y.max(p2.y));
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let nk = (k.0 + dx, k.1 + dy);
                    // Visit each unordered cell pair once.
                    if nk < k {
                        continue;
                    }
                    for &(_, j) in find(nk) {
                        let j = j as usize;
                        if nk == k && j <= i {
                            continue;
                        }
                        let diff = i.abs_diff(j);
                        if diff <= 1 || diff == n - 1 {
                            continue;
                        }
                        let (q1, q2) = poly.edge(j);
                        let gx = q1.x.min(q2.x) - pmaxx;
                        let gx = gx.max(pminx - q1.x.max(q2.x));
                        let gy = q1.y.min(q2.y) - pmaxy;
                        let gy = gy.max(pminy - q1.y.max(q2.y));
                        if gx >= best || gy >= best {
                            continue;
                        }
                        let d = segment_distance(p1, p2, q1, q2);
                        if d < best {
                            best = d;
                            if best == T::zero() {
                                return best;
                            }
                        }
                    }
                }
            }
        }
        start = end;
    }
    best
}

/// No two non-adjacent edges touch.
pub fn is_simple<T: Real>(poly: &Polygon<T>) -> bool {
    poly.len() < 4 || min_nonadjacent_gap(poly, T::min_positive_value()) > T::zero()
}

/// Distance from `p` to the closed polyline.
pub fn point_polygon_distance<T: Real>(p: Point<T>, poly: &Polygon<T>) -> T {
    (0..poly.len())
        .map(|i| {
            let (a, b) = poly.edge(i);
            point_segment_distance(p, a, b)
        })
        .fold(T::infinity(), T::min)
}

/// Symmetric Hausdorff distance between the vertex sets, each measured
/// against the other polyline. Quadratic; meant for verification.
pub fn hausdorff_distance<T: Real>(a: &Polygon<T>, b: &Polygon<T>) -> T {
    let one = |x: &Polygon<T>, y: &Polygon<T>| {
        x.vertices().iter().map(|&p| point_polygon_distance(p, y)).fold(T::zero(), T::max)
    };
    one(a, b).max(one(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(side: f64, ccw: bool) -> Polygon<f64> {
        let mut v = vec![
            Point::new(0.0, 0.0),
            Point::new(side, 0.0),
            Point::new(side, side),
            Point::new(0.0, side),
        ];
        if !ccw {
            v.reverse();
        }
        Polygon::new(v).unwrap()
    }

    #[test]
    fn unit_square_area_signs() {
        assert_eq!(signed_area(&square(1.0, true)), 1.0);
        assert_eq!(signed_area(&square(1.0, false)), -1.0);
        assert_eq!(square(1.0, false).orientation(), Orientation::Cw);
        assert_eq!(square(2.0, true).length(), 8.0);
    }

    #[test]
    fn regular_polygon_area_matches_formula() {
        let n = 1024;
        let p = Polygon::regular(Point::new(0.0, 0.0), 2.0, n, 0.0);
        let formula = (n as f64 / 2.0) * 4.0 * (std::f64::consts::TAU / n as f64).sin();
        assert!((p.signed_area() - formula).abs() < 1e-9);
        assert!((p.signed_area() - std::f64::consts::PI * 4.0).abs() < 1e-3);
    }

    #[test]
    fn too_few_vertices_rejected() {
        assert!(Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn surrounds_concentric_and_side_by_side() {
        let c = Point::new(0.0f64, 0.0);
        let r1 = Polygon::regular(c, 1.0, 64, 0.0);
        let r2 = Polygon::regular(c, 2.0, 64, 0.0);
        assert!(surrounds(&r1, &r2).unwrap());
        assert!(!surrounds(&r2, &r1).unwrap());
        let a = square(1.0, true);
        let b = a.map_points(|p| Point::new(p.x + 2.0, p.y)).unwrap();
        assert!(!surrounds(&a, &b).unwrap());
        assert!(!surrounds(&b, &a).unwrap());
        let c2 = a.map_points(|p| Point::new(p.x + 0.5, p.y + 0.5)).unwrap();
        assert!(surrounds(&a, &c2).is_err());
    }

    #[test]
    fn distances() {
        let c = Point::new(0.0f64, 0.0);
        let r1 = Polygon::regular(c, 1.0, 256, 0.0);
        let r3 = Polygon::regular(c, 3.0, 256, 0.0);
        // Inner vertices lie on their circle; the outer chord sagitta bounds the error.
        let sagitta = 3.0 * (1.0 - (std::f64::consts::PI / 256.0).cos());
        let d = min_distance(&r1, &r3);
        assert!((d - 2.0).abs() <= sagitta + 1e-12, "{d}");
        let a = square(1.0, true);
        let b = a.map_points(|p| Point::new(p.x + 1.0, p.y)).unwrap();
        assert_eq!(min_distance(&a, &b), 0.0);
        assert!(polygons_intersect(&a, &b));
    }

    #[test]
    fn curvature_of_regular_polygon() {
        let p = Polygon::regular(Point::new(3.0f64, -2.0), 5.0, 512, 0.1);
        for i in 0..p.len() {
            assert!((curvature_at(&p, i) - 0.2).abs() < 1e-3);
        }
        // Orientation does not change the sign: curvature points to the interior.
        let q = p.reversed();
        assert!((curvature_at(&q, 7) - 0.2).abs() < 1e-3);
    }

    #[test]
    fn collinear_curvature_is_zero() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(curvature_at(&p, 1), 0.0);
        assert_eq!(menger(Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)), 0.0);
    }

    #[test]
    fn convex_polygon_has_nonnegative_curvature() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(5.0, 2.0),
            Point::new(2.0, 4.0),
            Point::new(-1.0, 2.0),
        ])
        .unwrap();
        for poly in [p.clone(), p.reversed()] {
            assert!((0..poly.len()).all(|i| curvature_at(&poly, i) >= 0.0));
            assert!(poly.is_convex(0.0));
        }
    }

    #[test]
    fn resample_square() {
        let r = resample(&square(4.0, true), 1.0).unwrap();
        assert_eq!(r.len(), 16);
        for i in 0..16 {
            let (a, b) = r.edge(i);
            assert!((a.dist(b) - 1.0).abs() < 1e-12);
        }
        assert!(resample(&square(4.0, true), 0.0).is_err());
    }

    #[test]
    fn resample_uniform_polygon_is_stable() {
        let p = Polygon::regular(Point::new(0.0, 0.0), 10.0, 300, 0.0);
        let spacing = p.length() / 300.0;
        let r = resample(&p, spacing * (1.0 + 1e-9)).unwrap();
        assert!((r.len() as i64 - 300).abs() <= 1);
    }

    #[test]
    fn remesh_keeps_edges_in_range() {
        let p = Polygon::regular(Point::new(0.0, 0.0), 10.0, 2000, 0.0);
        let r = remesh(&p, 0.1, 8).unwrap();
        for i in 0..r.len() {
            let (a, b) = r.edge(i);
            let d = a.dist(b);
            assert!((0.05 - 1e-12..=0.1 + 1e-12).contains(&d), "{d}");
        }
        assert!(remesh(&r, 0.1, 8).is_none());
        let tiny = Polygon::regular(Point::new(0.0, 0.0), 0.01, 40, 0.0);
        assert_eq!(remesh(&tiny, 0.1, 8).unwrap().len(), 8);
    }

    #[test]
    fn simplicity() {
        assert!(is_simple(&square(1.0, true)));
        let bowtie = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(!is_simple(&bowtie));
        assert!(is_simple(&Polygon::regular(Point::new(0.0, 0.0), 3.0, 500, 0.0)));
    }

    #[test]
    fn centroid_of_offset_square() {
        let s = square(2.0, false).map_points(|p| Point::new(p.x + 1.0, p.y - 3.0)).unwrap();
        let c = s.centroid();
        assert!((c.x - 2.0).abs() < 1e-12 && (c.y + 2.0).abs() < 1e-12);
    }
}
