//! Painting an evolved family of level lines back into an image.

use rayon::prelude::*;

use crate::curves::{min_distance, Point, Polygon};
use crate::error::{Error, Result};
use crate::evolve::EvolvedCurve;
use crate::grid::ImageGrid;
use crate::scalar::Real;
use crate::topomap::{InclusionTree, LineId};

#[derive(Clone, Debug, PartialEq)]
pub struct EvolvedNode<T> {
    pub id: LineId,
    pub level: T,
    pub inner_value: T,
    pub polygon: Polygon<T>,
    /// Index of the nearest surviving ancestor; `None` is the domain root.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Collapse<T> {
    pub id: LineId,
    pub time: T,
    pub point: Point<T>,
}

/// Surviving lines in pre-order (ancestors first) with parent links
/// inherited from the initial tree.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvolvedTree<T> {
    pub nodes: Vec<EvolvedNode<T>>,
    pub collapses: Vec<Collapse<T>>,
}

impl<T: Real> EvolvedTree<T> {
    /// The tree itself, unevolved.
    pub fn from_initial(tree: &InclusionTree<T>) -> Self {
        let curves: Vec<EvolvedCurve<T>> =
            tree.lines().iter().map(|l| EvolvedCurve::Alive(l.polygon.clone())).collect();
        Self::splice(tree, &curves).expect("one curve per line")
    }

    /// Replaces each line by its evolved curve; collapsed lines are removed
    /// and their children re-parented to the nearest surviving ancestor.
    pub fn splice(tree: &InclusionTree<T>, evolved: &[EvolvedCurve<T>]) -> Result<Self> {
        if evolved.len() != tree.len() {
            return Err(Error::Parameter(format!(
                "expected {} evolved curves, got {}",
                tree.len(),
                evolved.len()
            )));
        }
        let mut new_index: Vec<Option<usize>> = vec![None; tree.len()];
        let mut out = EvolvedTree { nodes: Vec::new(), collapses: Vec::new() };
        for node in tree.preorder() {
            let line = tree.line(node);
            match &evolved[node] {
                EvolvedCurve::Alive(poly) => {
                    let mut anc = tree.parent(node);
                    let parent = loop {
                        match anc {
                            None => break None,
                            Some(a) => match new_index[a] {
                                Some(i) => break Some(i),
                                None => anc = tree.parent(a),
                            },
                        }
                    };
                    new_index[node] = Some(out.nodes.len());
                    out.nodes.push(EvolvedNode {
                        id: line.id,
                        level: line.level,
                        inner_value: line.inner_value,
                        polygon: poly.clone(),
                        parent,
                    });
                }
                EvolvedCurve::Collapsed { time, point } => {
                    out.collapses.push(Collapse { id: line.id, time: *time, point: *point });
                }
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Each child's first vertex must lie inside its parent.
    pub fn check_nesting(&self) -> Result<()> {
        for n in &self.nodes {
            if let Some(p) = n.parent {
                let parent = &self.nodes[p];
                if !parent.polygon.contains_point(n.polygon.vertices()[0]) {
                    return Err(Error::Geometry(format!(
                        "line {} escaped its parent {}",
                        n.id, parent.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Sets every sample whose point lies inside `poly` (boundary included) to `value`.
pub fn fill_polygon<T: Real>(buf: &mut [T], width: usize, height: usize, poly: &Polygon<T>, value: T) {
    let bb = poly.bbox();
    let y0 = bb.min.y.ceil().max(T::zero());
    let y1 = bb.max.y.floor().min(T::lit((height - 1) as f64));
    if y1 < y0 {
        return;
    }
    let (y0, y1) = (y0.to_usize().unwrap(), y1.to_usize().unwrap());
    let mut rows: Vec<Vec<T>> = vec![Vec::new(); y1 - y0 + 1];
    for i in 0..poly.len() {
        let (a, b) = poly.edge(i);
        let (lo, hi) = if a.y <= b.y { (a, b) } else { (b, a) };
        if lo.y == hi.y {
            continue;
        }
        // Half-open in y: [lo.y, hi.y).
        let first = lo.y.ceil().max(T::lit(y0 as f64));
        let mut y = first;
        while y < hi.y && y <= T::lit(y1 as f64) {
            let x = lo.x + (y - lo.y) * (hi.x - lo.x) / (hi.y - lo.y);
            rows[y.to_usize().unwrap() - y0].push(x);
            y += T::one();
        }
    }
    let xmax = T::lit((width - 1) as f64);
    for (r, xs) in rows.iter_mut().enumerate() {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let row = &mut buf[(y0 + r) * width..(y0 + r + 1) * width];
        for pair in xs.chunks_exact(2) {
            let a = pair[0].ceil().max(T::zero());
            let b = pair[1].floor().min(xmax);
            if b < a {
                continue;
            }
            for v in &mut row[a.to_usize().unwrap()..=b.to_usize().unwrap()] {
                *v = value;
            }
        }
    }
}

/// Paints the tree into a `width x height` grid: start from `background`,
/// then fill each line's interior with its inner value in pre-order so
/// deeper lines overwrite their ancestors.
pub fn rasterize<T: Real>(tree: &EvolvedTree<T>, width: usize, height: usize, background: T) -> Result<ImageGrid<T>> {
    tree.check_nesting()?;
    let mut buf = vec![background; width * height];
    for n in &tree.nodes {
        fill_polygon(&mut buf, width, height, &n.polygon, n.inner_value);
    }
    ImageGrid::new(width, height, buf)
}

/// Sets every sample outside `domain` to `background`.
pub fn mask_outside<T: Real>(grid: &ImageGrid<T>, domain: &Polygon<T>, background: T) -> Result<ImageGrid<T>> {
    let (w, h) = (grid.width(), grid.height());
    let mut inside = vec![T::zero(); w * h];
    fill_polygon(&mut inside, w, h, domain, T::one());
    ImageGrid::new(
        w,
        h,
        grid.samples().iter().zip(&inside).map(|(&v, &m)| if m > T::zero() { v } else { background }).collect(),
    )
}

/// Discrete Lipschitz constant: the largest `|level_a - level_b| / dist(a, b)`
/// over parent/child pairs of surviving lines. Zero with fewer than two lines.
pub fn lipschitz_estimate<T: Real>(tree: &EvolvedTree<T>) -> T {
    tree.nodes
        .par_iter()
        .filter_map(|n| {
            let p = &tree.nodes[n.parent?];
            let dl = (n.level - p.level).abs();
            if dl == T::zero() {
                return Some(T::zero());
            }
            let d = min_distance(&n.polygon, &p.polygon);
            Some(if d > T::zero() { dl / d } else { T::infinity() })
        })
        .reduce(T::zero, T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, level: f64, inner: f64, poly: Polygon<f64>, parent: Option<usize>) -> EvolvedNode<f64> {
        EvolvedNode { id: LineId(id), level, inner_value: inner, polygon: poly, parent }
    }

    fn circle(c: (f64, f64), r: f64) -> Polygon<f64> {
        Polygon::regular(Point::new(c.0, c.1), r, (r * 200.0) as usize, 0.0)
    }

    #[test]
    fn empty_tree_is_background() {
        let g = rasterize(&EvolvedTree::default(), 8, 5, 3.0).unwrap();
        assert!(g.samples().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn disk_fill_matches_point_in_circle() {
        let t = EvolvedTree { nodes: vec![node(0, 99.5, 100.0, circle((16.0, 16.0), 8.0), None)], collapses: vec![] };
        let g = rasterize(&t, 32, 32, 0.0).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let d = ((x as f64 - 16.0).powi(2) + (y as f64 - 16.0).powi(2)).sqrt();
                if d < 7.5 {
                    assert_eq!(g.get(x, y), 100.0);
                } else if d > 8.5 {
                    assert_eq!(g.get(x, y), 0.0);
                }
            }
        }
    }

    #[test]
    fn nested_pair_paints_annulus() {
        let t = EvolvedTree {
            nodes: vec![
                node(0, 49.5, 50.0, circle((16.0, 16.0), 10.0), None),
                node(1, 99.5, 100.0, circle((16.0, 16.0), 5.0), Some(0)),
            ],
            collapses: vec![],
        };
        let g = rasterize(&t, 32, 32, 0.0).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let d = ((x as f64 - 16.0).powi(2) + (y as f64 - 16.0).powi(2)).sqrt();
                let expect = if d < 4.5 {
                    Some(100.0)
                } else if d > 5.5 && d < 9.5 {
                    Some(50.0)
                } else if d > 10.5 {
                    Some(0.0)
                } else {
                    None
                };
                if let Some(e) = expect {
                    assert_eq!(g.get(x, y), e, "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn escaped_child_is_rejected() {
        let t = EvolvedTree {
            nodes: vec![
                node(0, 1.0, 1.0, circle((5.0, 5.0), 2.0), None),
                node(1, 2.0, 2.0, circle((20.0, 5.0), 1.0), Some(0)),
            ],
            collapses: vec![],
        };
        assert!(matches!(rasterize(&t, 32, 32, 0.0), Err(Error::Geometry(_))));
    }

    #[test]
    fn boundary_sample_takes_inner_value() {
        let sq = Polygon::new(vec![
            Point::new(1.0, 1.0),
            Point::new(3.0, 1.0),
            Point::new(3.0, 3.0),
            Point::new(1.0, 3.0),
        ])
        .unwrap();
        let mut buf = vec![0.0; 25];
        fill_polygon(&mut buf, 5, 5, &sq, 1.0);
        assert_eq!(buf[5 + 1], 1.0);
        assert_eq!(buf[2 * 5 + 3], 1.0);
        assert_eq!(buf[0], 0.0);
    }

    #[test]
    fn lipschitz_of_concentric_circles() {
        let t = EvolvedTree {
            nodes: vec![
                node(0, 10.0, 10.0, Polygon::regular(Point::new(0.0, 0.0), 5.0, 4000, 0.0), None),
                node(1, 20.0, 20.0, Polygon::regular(Point::new(0.0, 0.0), 4.0, 4000, 0.0), Some(0)),
            ],
            collapses: vec![],
        };
        assert!((lipschitz_estimate(&t) - 10.0).abs() < 1e-3);
        let single = EvolvedTree { nodes: vec![t.nodes[0].clone()], collapses: vec![] };
        assert_eq!(lipschitz_estimate(&single), 0.0);
    }
}
