//! SVG and JSON artifacts for line families.

use std::fmt::Write as _;

use serde::Serialize;

use crate::curves::{curvature_at, Polygon};
use crate::reconstruct::EvolvedTree;
use crate::scalar::Real;
use crate::topomap::InclusionTree;

/// One line as seen by the exporters.
#[derive(Clone, Copy, Debug)]
pub struct LineRef<'a, T> {
    pub id: u32,
    pub level: T,
    pub inner_value: T,
    pub parent: Option<u32>,
    pub polygon: &'a Polygon<T>,
}

pub fn initial_lines<T: Real>(tree: &InclusionTree<T>) -> Vec<LineRef<'_, T>> {
    tree.preorder()
        .into_iter()
        .map(|n| {
            let l = tree.line(n);
            LineRef {
                id: l.id.0,
                level: l.level,
                inner_value: l.inner_value,
                parent: tree.parent(n).map(|p| tree.line(p).id.0),
                polygon: &l.polygon,
            }
        })
        .collect()
}

pub fn evolved_lines<T: Real>(tree: &EvolvedTree<T>) -> Vec<LineRef<'_, T>> {
    tree.nodes
        .iter()
        .map(|n| LineRef {
            id: n.id.0,
            level: n.level,
            inner_value: n.inner_value,
            parent: n.parent.map(|p| tree.nodes[p].id.0),
            polygon: &n.polygon,
        })
        .collect()
}

/// Blue (0) to red (1).
fn ramp(s: f64) -> String {
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.5 };
    let r = (255.0 * s).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * s - 1.0).abs()) * 0.8).round() as u8;
    let b = (255.0 * (1.0 - s)).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn svg_open(out: &mut String, width: usize, height: usize, extra_height: usize) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="-0.5 -0.5 {w} {h}">"#,
        w = width,
        h = height + extra_height
    );
}

fn path_data<T: Real>(poly: &Polygon<T>) -> String {
    let mut d = String::with_capacity(poly.len() * 16);
    for (i, p) in poly.vertices().iter().enumerate() {
        let _ = write!(d, "{}{:.3} {:.3} ", if i == 0 { 'M' } else { 'L' }, p.x.as_f64(), p.y.as_f64());
    }
    d.push('Z');
    d
}

/// One closed path per line, stroke colored by level over the family's range.
///
/// Line coordinates are shifted by `-margin` on both axes, so lines found on
/// a padded grid land on the unpadded `width x height` canvas.
pub fn lines_svg<T: Real>(lines: &[LineRef<'_, T>], width: usize, height: usize, margin: usize) -> String {
    let (lo, hi) = lines.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
        (lo.min(l.level.as_f64()), hi.max(l.level.as_f64()))
    });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = String::new();
    svg_open(&mut out, width, height, 0);
    let _ = writeln!(out, r#"<rect x="-0.5" y="-0.5" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(out, r#"<g fill="none" stroke-width="0.15" transform="translate(-{margin} -{margin})">"#);
    for l in lines {
        let _ = writeln!(
            out,
            r#"<path id="line{}" data-level="{}" stroke="{}" d="{}"/>"#,
            l.id,
            l.level,
            ramp((l.level.as_f64() - lo) / span),
            path_data(l.polygon)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[derive(Serialize)]
struct NodeJson {
    id: u32,
    level: f64,
    parent: Option<u32>,
    area: f64,
    vertex_count: usize,
    inner_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct TreeJson {
    nodes: Vec<NodeJson>,
}

/// `{"nodes": [{id, level, parent, area, vertex_count, inner_value, vertices?}]}`
/// in pre-order.
/// Vertices are shifted by `-margin`.
pub fn tree_json<T: Real>(lines: &[LineRef<'_, T>], with_vertices: bool, margin: usize) -> serde_json::Value {
    let m = margin as f64;
    let nodes = lines
        .iter()
        .map(|l| NodeJson {
            id: l.id,
            level: l.level.as_f64(),
            parent: l.parent,
            area: l.polygon.area().as_f64(),
            vertex_count: l.polygon.len(),
            inner_value: l.inner_value.as_f64(),
            vertices: with_vertices.then(|| l.polygon.vertices().iter().map(|p| [p.x.as_f64() - m, p.y.as_f64() - m]).collect()),
        })
        .collect();
    serde_json::to_value(TreeJson { nodes }).expect("tree json")
}

const LEGEND_HEIGHT: usize = 14;

/// Signed curvature along each line, one colored segment per edge (mean of
/// its endpoint curvatures). Positive means the upper set is locally convex.
/// A legend with the color scale sits below the image area. Coordinates are
/// shifted by `-margin` as in [`lines_svg`].
pub fn curvature_map_svg<T: Real>(lines: &[LineRef<'_, T>], width: usize, height: usize, margin: usize) -> String {
    let per_line: Vec<Vec<f64>> = lines
        .iter()
        .map(|l| {
            let s = l.polygon.orientation().sign::<T>();
            (0..l.polygon.len()).map(|i| (s * curvature_at(l.polygon, i)).as_f64()).collect()
        })
        .collect();
    let kmax = per_line.iter().flatten().fold(0.0f64, |m, k| m.max(k.abs()));
    let scale = if kmax > 0.0 { kmax } else { 1.0 };

    let mut out = String::new();
    svg_open(&mut out, width, height, LEGEND_HEIGHT);
    let _ = writeln!(out, r#"<rect x="-0.5" y="-0.5" width="{width}" height="{height}" fill="black"/>"#);
    let _ = writeln!(
        out,
        r#"<g fill="none" stroke-width="0.2" stroke-linecap="round" transform="translate(-{margin} -{margin})">"#
    );
    for (l, ks) in lines.iter().zip(&per_line) {
        let v = l.polygon.vertices();
        let _ = writeln!(out, r#"<g id="line{}">"#, l.id);
        for i in 0..v.len() {
            let j = (i + 1) % v.len();
            let k = 0.5 * (ks[i] + ks[j]);
            let _ = writeln!(
                out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{}"/>"#,
                v[i].x.as_f64(),
                v[i].y.as_f64(),
                v[j].x.as_f64(),
                v[j].y.as_f64(),
                ramp(0.5 + 0.5 * k / scale)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n");

    // Scale bar: -kmax .. 0 .. +kmax.
    let y0 = height as f64 + 1.0;
    let bar_w = (width as f64 * 0.6).max(1.0);
    let x0 = (width as f64 - bar_w) * 0.5 - 0.5;
    let steps = 32;
    let _ = writeln!(out, r#"<g id="legend" font-family="sans-serif" font-size="4">"#);
    for s in 0..steps {
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{y0:.3}" width="{:.3}" height="4" fill="{}"/>"#,
            x0 + bar_w * s as f64 / steps as f64,
            bar_w / steps as f64 + 0.01,
            ramp((s as f64 + 0.5) / steps as f64)
        );
    }
    let ty = y0 + 9.0;
    let _ = writeln!(out, r#"<text x="{x0:.3}" y="{ty:.3}" text-anchor="start">{:.4}</text>"#, -kmax);
    let _ = writeln!(out, r#"<text x="{:.3}" y="{ty:.3}" text-anchor="middle">0</text>"#, x0 + bar_w * 0.5);
    let _ = writeln!(out, r#"<text x="{:.3}" y="{ty:.3}" text-anchor="end">{:.4}</text>"#, x0 + bar_w, kmax);
    out.push_str("</g>\n</svg>\n");
    out
}
