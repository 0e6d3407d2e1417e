//! Level lines of the bilinear interpolate and their inclusion tree.
//!
//! At a non-critical level the iso-set `{u = level}` of the bilinear
//! interpolate is a finite union of disjoint Jordan curves. Extraction walks
//! the dual pixels, joins per-pixel hyperbola arcs into closed polygons
//! oriented with `{u > level}` on the left, and [`build_inclusion_tree`]
//! nests them.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::curves::{segments_intersect, BBox, Orientation, Point, Polygon};
use crate::error::{Error, Result};
use crate::grid::{critical_levels, sort_dedup, ImageGrid};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct LineId(pub u32);

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Which side of the line holds the larger values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Polarity {
    /// Interior holds `u > level`.
    Upper,
    /// Interior holds `u < level`.
    Lower,
}

/// One closed level line.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelLine<T> {
    pub id: LineId,
    pub level: T,
    pub polygon: Polygon<T>,
    /// Value painted inside the line at reconstruction.
    pub inner_value: T,
}

impl<T: Real> LevelLine<T> {
    pub fn orientation(&self) -> Orientation {
        self.polygon.orientation()
    }

    pub fn polarity(&self) -> Polarity {
        match self.orientation() {
            Orientation::Ccw => Polarity::Upper,
            Orientation::Cw => Polarity::Lower,
        }
    }

    /// Sets the inner value from the values just below and just above the level.
    pub fn assign_inner_value(&mut self, below: T, above: T) {
        self.inner_value = match self.polarity() {
            Polarity::Upper => above,
            Polarity::Lower => below,
        };
    }
}

/// Extraction levels `offset + k*step` strictly inside the value range,
/// passed through [`nudge_levels`].
pub fn quantized_levels<T: Real>(grid: &ImageGrid<T>, step: T, offset: T) -> Result<Vec<T>> {
    if !(step > T::zero()) || !step.is_finite() || !offset.is_finite() {
        return Err(Error::Parameter(format!("quantization step must be positive, got {step}")));
    }
    let (lo, hi) = grid.value_range();
    let mut k = ((lo - offset) / step).floor().to_i64().unwrap_or(0);
    let mut nominal = Vec::new();
    loop {
        let level = offset + T::lit(k as f64) * step;
        k += 1;
        if level >= hi {
            break;
        }
        if level > lo {
            nominal.push(level);
        }
    }
    Ok(nudge_levels(grid, &nominal))
}

/// Moves each level up by `T::level_nudge()` until it is farther than that
/// from every critical level and sample value; levels pushed past the value
/// range are dropped. The order of the input is kept.
pub fn nudge_levels<T: Real>(grid: &ImageGrid<T>, levels: &[T]) -> Vec<T> {
    let (_, hi) = grid.value_range();
    let mut avoid = critical_levels(grid);
    avoid.extend_from_slice(grid.samples());
    sort_dedup(&mut avoid, T::zero());
    let nudge = T::level_nudge();
    let mut out = Vec::with_capacity(levels.len());
    for &l in levels {
        let mut level = l;
        loop {
            let i = avoid.partition_point(|&c| c < level - nudge);
            match avoid.get(i) {
                Some(&c) if (c - level).abs() <= nudge => level += nudge,
                _ => break,
            }
        }
        if level < hi {
            out.push(level);
        }
    }
    out
}

struct CellField<T> {
    a: T,
    b: T,
    c: T,
    d: T,
}

impl<T: Real> CellField<T> {
    fn new(c: [T; 4]) -> Self {
        CellField { a: c[0], b: c[1] - c[0], c: c[2] - c[0], d: c[0] + c[3] - c[1] - c[2] }
    }

    /// Hyperbola arc points strictly between `p` and `q` (local coordinates),
    /// consecutive points at most `spacing` apart.
    fn arc(&self, level: T, p: Point<T>, q: Point<T>, spacing: T, out: &mut Vec<Point<T>>) {
        if p.dist(q) <= spacing {
            return;
        }
        let by_x = (q.x - p.x).abs() >= (q.y - p.y).abs();
        let mut n = (p.dist(q) / spacing).ceil().to_usize().unwrap_or(2).max(2);
        let start = out.len();
        for _ in 0..20 {
            out.truncate(start);
            let mut prev = p;
            let mut worst = T::zero();
            for k in 1..n {
                let s = T::lit(k as f64) / T::lit(n as f64);
                let pt = if by_x {
                    let x = p.x + (q.x - p.x) * s;
                    let den = self.c + self.d * x;
                    let y = if den != T::zero() { (level - self.a - self.b * x) / den } else { p.y + (q.y - p.y) * s };
                    Point::new(x, clamp01(y))
                } else {
                    let y = p.y + (q.y - p.y) * s;
                    let den = self.b + self.d * y;
                    let x = if den != T::zero() { (level - self.a - self.c * y) / den } else { p.x + (q.x - p.x) * s };
                    Point::new(clamp01(x), y)
                };
                worst = worst.max(pt.dist(prev));
                prev = pt;
                out.push(pt);
            }
            worst = worst.max(prev.dist(q));
            if worst <= spacing {
                return;
            }
            n *= 2;
        }
    }
}

#[inline]
fn clamp01<T: Real>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

struct Segment {
    start_edge: u32,
    end_edge: u32,
    arc: (u32, u32),
}

/// All level lines of the bilinear interpolate at `level`, sampled so
/// consecutive vertices are at most `precision` apart.
///
/// Edge crossings come from exact linear inversion along dual-pixel edges;
/// in a saddle pixel the arcs separate the corners whose side of the level
/// differs from the saddle value. Lines are returned rotated to start at
/// their lexicographically smallest vertex and sorted by that vertex.
pub fn extract_level_lines<T: Real>(grid: &ImageGrid<T>, level: T, precision: T) -> Result<Vec<LevelLine<T>>> {
    if !(precision > T::zero()) {
        return Err(Error::Parameter(format!("precision must be positive, got {precision}")));
    }
    let tol = T::dedup_tolerance();
    let (w, h) = (grid.width(), grid.height());
    let s = grid.samples();
    if s.iter().any(|&v| (v - level).abs() <= tol) {
        return Err(Error::CriticalLevel { level: level.as_f64() });
    }
    let above: Vec<bool> = s.iter().map(|&v| v > level).collect();
    let n_h = (w - 1) * h;
    let n_edges = n_h + w * (h - 1);
    let h_edge = |x: usize, y: usize| (y * (w - 1) + x) as u32;
    let v_edge = |x: usize, y: usize| (n_h + y * w + x) as u32;

    let crossing = |e: u32| -> Point<T> {
        let e = e as usize;
        if e < n_h {
            let (x, y) = (e % (w - 1), e / (w - 1));
            let (u0, u1) = (grid.get(x, y), grid.get(x + 1, y));
            Point::new(T::lit(x as f64) + (level - u0) / (u1 - u0), T::lit(y as f64))
        } else {
            let e = e - n_h;
            let (x, y) = (e % w, e / w);
            let (u0, u1) = (grid.get(x, y), grid.get(x, y + 1));
            Point::new(T::lit(x as f64), T::lit(y as f64) + (level - u0) / (u1 - u0))
        }
    };
    let on_border = |e: u32| -> bool {
        let e = e as usize;
        if e < n_h {
            let y = e / (w - 1);
            y == 0 || y == h - 1
        } else {
            let x = (e - n_h) % w;
            x == 0 || x == w - 1
        }
    };

    let mut segments: Vec<Segment> = Vec::new();
    let mut arcs: Vec<Point<T>> = Vec::new();
    let mut start_of = vec![u32::MAX; n_edges];
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            let i = y * w + x;
            // Corners counter-clockwise: (x,y), (x+1,y), (x+1,y+1), (x,y+1).
            let lab = [above[i], above[i + 1], above[i + w + 1], above[i + w]];
            if lab.iter().all(|&a| a == lab[0]) {
                continue;
            }
            let edges = [h_edge(x, y), v_edge(x + 1, y), h_edge(x, y + 1), v_edge(x, y)];
            let corners = grid.cell_corners(x, y);
            let saddle_above = if lab[0] == lab[2] && lab[1] == lab[3] {
                let [u00, u10, u01, u11] = corners;
                let d = u00 + u11 - u10 - u01;
                let sl = (u00 * u11 - u10 * u01) / d;
                if (sl - level).abs() <= tol {
                    return Err(Error::CriticalLevel { level: level.as_f64() });
                }
                Some(sl > level)
            } else {
                None
            };
            let field = CellField::new(corners);
            let origin = Point::new(T::lit(x as f64), T::lit(y as f64));
            for k in 0..4 {
                if !(lab[k] && !lab[(k + 1) % 4]) {
                    continue;
                }
                let end = match saddle_above {
                    // Arcs cut off the corners below the level.
                    Some(true) => (k + 1) % 4,
                    // Arcs cut off the corners above the level.
                    Some(false) => (k + 3) % 4,
                    None => (1..4).map(|j| (k + j) % 4).find(|&j| !lab[j] && lab[(j + 1) % 4]).unwrap(),
                };
                let (e0, e1) = (edges[k], edges[end]);
                if on_border(e0) || on_border(e1) {
                    return Err(Error::Geometry(format!(
                        "level line at {level} reaches the domain boundary near ({x}, {y}); pad the image with zeros"
                    )));
                }
                let a0 = arcs.len() as u32;
                let (p, q) = (crossing(e0) - origin, crossing(e1) - origin);
                field.arc(level, p, q, precision, &mut arcs);
                for pt in &mut arcs[a0 as usize..] {
                    *pt = *pt + origin;
                }
                start_of[e0 as usize] = segments.len() as u32;
                segments.push(Segment { start_edge: e0, end_edge: e1, arc: (a0, arcs.len() as u32) });
            }
        }
    }

    let mut visited = vec![false; segments.len()];
    let mut lines = Vec::new();
    for first in 0..segments.len() {
        if visited[first] {
            continue;
        }
        let mut verts = Vec::new();
        let mut cur = first;
        loop {
            visited[cur] = true;
            let seg = &segments[cur];
            verts.push(crossing(seg.start_edge));
            verts.extend_from_slice(&arcs[seg.arc.0 as usize..seg.arc.1 as usize]);
            let next = start_of[seg.end_edge as usize];
            if next == u32::MAX {
                return Err(Error::Geometry(format!("open contour at level {level}")));
            }
            cur = next as usize;
            if cur == first {
                break;
            }
        }
        let lo = (0..verts.len()).min_by(|&a, &b| lex(verts[a], verts[b])).unwrap();
        verts.rotate_left(lo);
        lines.push(LevelLine { id: LineId(0), level, polygon: Polygon::new(verts)?, inner_value: level });
    }
    lines.sort_by(|a, b| lex(a.polygon.vertices()[0], b.polygon.vertices()[0]));
    for (i, l) in lines.iter_mut().enumerate() {
        l.id = LineId(i as u32);
    }
    Ok(lines)
}

fn lex<T: Real>(a: Point<T>, b: Point<T>) -> Ordering {
    a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap())
}

/// Extracts every level in parallel and numbers the lines globally in
/// (level, first vertex) order.
pub fn extract_all<T: Real>(grid: &ImageGrid<T>, levels: &[T], precision: T) -> Result<Vec<LevelLine<T>>> {
    let per_level: Vec<Vec<LevelLine<T>>> =
        levels.par_iter().map(|&l| extract_level_lines(grid, l, precision)).collect::<Result<_>>()?;
    let mut all: Vec<LevelLine<T>> = per_level.into_iter().flatten().collect();
    all.sort_by(|a, b| {
        a.level.partial_cmp(&b.level).unwrap().then_with(|| lex(a.polygon.vertices()[0], b.polygon.vertices()[0]))
    });
    for (i, l) in all.iter_mut().enumerate() {
        l.id = LineId(i as u32);
    }
    Ok(all)
}

/// Nesting hierarchy of level lines under a virtual root standing for the
/// whole domain (inner value 0).
#[derive(Clone, Debug)]
pub struct InclusionTree<T> {
    lines: Vec<LevelLine<T>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl<T: Real> InclusionTree<T> {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn lines(&self) -> &[LevelLine<T>] {
        &self.lines
    }

    pub fn line(&self, node: usize) -> &LevelLine<T> {
        &self.lines[node]
    }

    /// `None` means the node hangs from the root.
    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Children of the virtual root.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// Nodes in depth-first pre-order (every ancestor before its descendants).
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack: Vec<usize> = self.roots.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children[n].iter().rev());
        }
        out
    }

    pub fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        while let Some(p) = self.parent[b] {
            if p == a {
                return true;
            }
            b = p;
        }
        false
    }

    pub fn depth(&self, mut node: usize) -> usize {
        let mut d = 1;
        while let Some(p) = self.parent[node] {
            d += 1;
            node = p;
        }
        d
    }

    pub(crate) fn from_parents(lines: Vec<LevelLine<T>>, parent: Vec<Option<usize>>) -> Self {
        let mut children = vec![Vec::new(); lines.len()];
        let mut roots = Vec::new();
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }
        InclusionTree { lines, parent, children, roots }
    }
}

/// Nests the lines: the parent of a line is the smallest-area line whose
/// interior contains it.
///
/// Lines are inserted by decreasing area and pushed down from the root.
/// Two probe vertices are tested against every candidate parent; if they
/// disagree the lines cross and a [`Error::Crossing`] names them.
pub fn build_inclusion_tree<T: Real>(lines: Vec<LevelLine<T>>) -> Result<InclusionTree<T>> {
    let n = lines.len();
    let boxes: Vec<BBox<T>> = lines.iter().map(|l| l.polygon.bbox()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        lines[b].polygon.area().partial_cmp(&lines[a].polygon.area()).unwrap().then(a.cmp(&b))
    });
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut roots: Vec<usize> = Vec::new();
    for &i in &order {
        let v = lines[i].polygon.vertices();
        let (p, q) = (v[0], v[v.len() / 2]);
        let mut cur: Option<usize> = None;
        'descend: loop {
            let list = match cur {
                None => &roots,
                Some(c) => &kids[c],
            };
            for &c in list {
                let poly = &lines[c].polygon;
                let in_p = boxes[c].contains(p) && poly.contains_point(p);
                let in_q = boxes[c].contains(q) && poly.contains_point(q);
                if in_p != in_q {
                    return Err(Error::Crossing { a: lines[i].id.0, b: lines[c].id.0 });
                }
                if in_p {
                    cur = Some(c);
                    continue 'descend;
                }
            }
            break;
        }
        parent[i] = cur;
        match cur {
            None => roots.push(i),
            Some(c) => kids[c].push(i),
        }
    }
    Ok(InclusionTree::from_parents(lines, parent))
}

/// Exhaustive check that no two line boundaries touch, using a unit hash grid.
pub fn validate_disjoint<T: Real>(lines: &[LevelLine<T>]) -> Result<()> {
    let mut buckets: HashMap<(i64, i64), Vec<(u32, u32)>> = HashMap::new();
    let key = |x: T| x.floor().to_i64().unwrap_or(0);
    for (li, l) in lines.iter().enumerate() {
        for e in 0..l.polygon.len() {
            let (a, b) = l.polygon.edge(e);
            for cx in key(a.x.min(b.x))..=key(a.x.max(b.x)) {
                for cy in key(a.y.min(b.y))..=key(a.y.max(b.y)) {
                    buckets.entry((cx, cy)).or_default().push((li as u32, e as u32));
                }
            }
        }
    }
    for segs in buckets.values() {
        for (s, &(la, ea)) in segs.iter().enumerate() {
            let pa = &lines[la as usize].polygon;
            let (p1, p2) = pa.edge(ea as usize);
            for &(lb, eb) in &segs[s + 1..] {
                if la == lb {
                    let n = pa.len() as u32;
                    let d = ea.abs_diff(eb);
                    if d <= 1 || d == n - 1 {
                        continue;
                    }
                }
                let (q1, q2) = lines[lb as usize].polygon.edge(eb as usize);
                if segments_intersect(p1, p2, q1, q2) {
                    return Err(Error::Crossing { a: lines[la as usize].id.0, b: lines[lb as usize].id.0 });
                }
            }
        }
    }
    Ok(())
}

fn interval_index<T: Real>(critical: &[T], level: T) -> usize {
    critical.partition_point(|&c| c < level)
}

fn continues_crown<T: Real>(tree: &InclusionTree<T>, critical: &[T], parent: usize, child: usize) -> bool {
    let (a, b) = (tree.line(parent), tree.line(child));
    tree.children(parent).len() == 1
        && a.polarity() == b.polarity()
        && interval_index(critical, a.level) == interval_index(critical, b.level)
}

/// Crowns: maximal single-child chains whose levels stay between the same
/// two consecutive critical levels, listed outermost first.
pub fn crown_views<T: Real>(tree: &InclusionTree<T>, critical: &[T]) -> Vec<Vec<usize>> {
    let mut crowns = Vec::new();
    for node in tree.preorder() {
        let starts = match tree.parent(node) {
            None => true,
            Some(p) => !continues_crown(tree, critical, p, node),
        };
        if !starts {
            continue;
        }
        let mut chain = vec![node];
        let mut cur = node;
        while let [only] = tree.children(cur) {
            if !continues_crown(tree, critical, cur, *only) {
                break;
            }
            cur = *only;
            chain.push(cur);
        }
        crowns.push(chain);
    }
    crowns
}

/// Region between an exterior line (or the domain, when `None`) and its
/// child lines, at a critical level.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatRegionView<T> {
    pub exterior: Option<usize>,
    pub interiors: Vec<usize>,
    pub level: T,
}

/// Flat regions: the domain's outer region plus the region inside the last
/// line of every crown.
///
/// The level is the critical value separating the exterior from its
/// interiors; for a leaf it is the next critical value past the line in the
/// direction of its polarity.
pub fn flat_regions<T: Real>(tree: &InclusionTree<T>, critical: &[T]) -> Vec<FlatRegionView<T>> {
    let mut out = vec![FlatRegionView { exterior: None, interiors: tree.roots().to_vec(), level: T::zero() }];
    for crown in crown_views(tree, critical) {
        let last = *crown.last().unwrap();
        let line = tree.line(last);
        let i = interval_index(critical, line.level);
        let up = critical.get(i).copied();
        let down = if i > 0 { critical.get(i - 1).copied() } else { None };
        let level = match tree.children(last).first() {
            Some(&c) if tree.line(c).level > line.level => up,
            Some(&c) if tree.line(c).level < line.level => down,
            _ => match line.polarity() {
                Polarity::Upper => up,
                Polarity::Lower => down,
            },
        };
        out.push(FlatRegionView {
            exterior: Some(last),
            interiors: tree.children(last).to_vec(),
            level: level.unwrap_or(line.inner_value),
        });
    }
    out
}
