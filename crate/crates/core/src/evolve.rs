//! Curve shortening and affine shortening of polygons.
//!
//! Each vertex moves along the discrete curvature vector,
//! `dx/dt = s(k) n`, with `k` the Menger curvature of the vertex and its
//! neighbours and `n` the unit normal toward the concave side. Curve
//! shortening uses `s(k) = k`, affine shortening `s(k) = sgn(k) |k|^(1/3)`.
//! Time steps are explicit and adaptive; the polygon is remeshed so edges
//! stay within `[spacing/2, spacing]`.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::curves::{is_simple, menger, next, prev, min_nonadjacent_gap, remesh, remesh_tracked, Point, Polygon};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Curve shortening.
    Cs,
    /// Affine shortening.
    As,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cs" | "curve" => Ok(Scheme::Cs),
            "as" | "affine" => Ok(Scheme::As),
            other => Err(Error::Parameter(format!("unknown scheme {other:?}; expected cs or as"))),
        }
    }
}

impl Scheme {
    #[inline]
    pub fn speed<T: Real>(self, k: T) -> T {
        match self {
            Scheme::Cs => k,
            Scheme::As => {
                if k == T::zero() {
                    T::zero()
                } else {
                    k.signum() * k.abs().cbrt()
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowParams<T> {
    pub scheme: Scheme,
    /// Target edge length, pixels.
    pub spacing: T,
    /// Safety factor `c` in the adaptive step.
    pub dt_safety: T,
    /// The curve counts as collapsed once its area drops below this.
    pub collapse_area: T,
    pub max_steps: usize,
    /// Remeshing never goes below this many vertices.
    pub min_vertices: usize,
}

impl<T: Real> FlowParams<T> {
    /// Defaults: `c = 0.25`, collapse area `spacing^2`.
    pub fn new(scheme: Scheme, spacing: T) -> Self {
        FlowParams {
            scheme,
            spacing,
            dt_safety: T::lit(0.25),
            collapse_area: spacing * spacing,
            max_steps: 50_000_000,
            min_vertices: 8,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.spacing > T::zero()) || !(self.dt_safety > T::zero()) || !(self.collapse_area >= T::zero()) {
            return Err(Error::Parameter(format!(
                "flow parameters must be positive (spacing {}, safety {}, collapse area {})",
                self.spacing, self.dt_safety, self.collapse_area
            )));
        }
        Ok(())
    }

    /// Adaptive step `c h^2 / max(1, K h)`, where `h` is the shortest edge
    /// and `K` the largest `|k|` (curve shortening) or `|k|^(1/3)` (affine).
    pub fn stable_dt(&self, poly: &Polygon<T>) -> T {
        let v = poly.vertices();
        let n = v.len();
        let mut h = T::infinity();
        let mut kmax = T::zero();
        for i in 0..n {
            h = h.min(v[i].dist(v[next(i, n)]));
            let k = menger(v[prev(i, n)], v[i], v[next(i, n)]).abs();
            kmax = kmax.max(k);
        }
        let kk = match self.scheme {
            Scheme::Cs => kmax,
            Scheme::As => kmax.cbrt(),
        };
        self.dt_safety * h * h / T::one().max(kk * h)
    }
}

/// Outcome of evolving one curve.
#[derive(Clone, Debug, PartialEq)]
pub enum EvolvedCurve<T> {
    Alive(Polygon<T>),
    /// Collapse time estimate and the centroid of the last polygon.
    Collapsed { time: T, point: Point<T> },
}

impl<T: Real> EvolvedCurve<T> {
    pub fn polygon(&self) -> Option<&Polygon<T>> {
        match self {
            EvolvedCurve::Alive(p) => Some(p),
            EvolvedCurve::Collapsed { .. } => None,
        }
    }

    pub fn is_alive(&self) -> bool {
        matches!(self, EvolvedCurve::Alive(_))
    }
}

/// Moves every vertex by `dt * speed(k) * n`; returns the moved vertices and
/// the largest displacement.
///
/// For affine shortening the speeds are averaged with weights `1/6, 4/6, 1/6`
/// over neighbouring vertices. The cube root has unbounded slope at zero, so
/// an alternating vertex wobble otherwise grows until it stalls the flow; the
/// average damps that mode by a factor 3 and leaves circles untouched.
fn advance<T: Real>(poly: &Polygon<T>, dt: T, scheme: Scheme) -> (Vec<Point<T>>, T) {
    let v = poly.vertices();
    let n = v.len();
    let mut speed: Vec<T> = (0..n).map(|i| scheme.speed(menger(v[prev(i, n)], v[i], v[next(i, n)]))).collect();
    if scheme == Scheme::As {
        let sixth = T::one() / T::lit(6.0);
        let raw = speed.clone();
        for i in 0..n {
            speed[i] = (raw[prev(i, n)] + raw[next(i, n)] + raw[i] * T::lit(4.0)) * sixth;
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut max_disp = T::zero();
    for i in 0..n {
        let b = v[i];
        let t = v[next(i, n)] - v[prev(i, n)];
        let tl = t.norm();
        if speed[i] == T::zero() || tl == T::zero() {
            out.push(b);
            continue;
        }
        // Left normal; k > 0 on left turns so k * n points to the concave side.
        let normal = t.perp() * (T::one() / tl);
        let disp = dt * speed[i];
        max_disp = max_disp.max(disp.abs());
        out.push(b + normal * disp);
    }
    (out, max_disp)
}

fn step_checked<T: Real>(poly: &Polygon<T>, dt: T, spacing: T, scheme: Scheme) -> Result<Polygon<T>> {
    if !(dt >= T::zero()) || !(spacing > T::zero()) {
        return Err(Error::Parameter(format!("step needs dt >= 0 and spacing > 0 (dt {dt}, spacing {spacing})")));
    }
    let (moved, _) = advance(poly, dt, scheme);
    let moved = Polygon::new(moved)?;
    let out = remesh(&moved, spacing, 8).unwrap_or(moved);
    if !is_simple(&out) {
        return Err(Error::Numerical(format!("step of {dt} produced a self-intersection; halve the step")));
    }
    Ok(out)
}

/// One explicit curve-shortening step followed by remeshing at `spacing`.
pub fn cs_step<T: Real>(poly: &Polygon<T>, dt: T, spacing: T) -> Result<Polygon<T>> {
    step_checked(poly, dt, spacing, Scheme::Cs)
}

/// One explicit affine-shortening step followed by remeshing at `spacing`.
pub fn as_step<T: Real>(poly: &Polygon<T>, dt: T, spacing: T) -> Result<Polygon<T>> {
    step_checked(poly, dt, spacing, Scheme::As)
}

/// One row of a per-curve trajectory dump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow<T> {
    pub step: usize,
    pub time: T,
    pub area: T,
    pub length: T,
    pub isoperimetric: T,
}

impl<T: Real> TrajectoryRow<T> {
    fn of(step: usize, time: T, poly: &Polygon<T>) -> Self {
        TrajectoryRow {
            step,
            time,
            area: poly.area(),
            length: poly.length(),
            isoperimetric: poly.isoperimetric_ratio(),
        }
    }
}

/// Writes `curve,step,time,area,length,isoperimetric` rows.
pub fn write_trajectory_csv<T: Real, W: Write>(mut out: W, curve: u32, rows: &[TrajectoryRow<T>]) -> Result<()> {
    for r in rows {
        writeln!(out, "{curve},{},{},{},{},{}", r.step, r.time, r.area, r.length, r.isoperimetric)?;
    }
    Ok(())
}

pub const TRAJECTORY_HEADER: &str = "curve,step,time,area,length,isoperimetric";

/// Evolves `poly` for time `t`.
///
/// Stops early once the area falls below `collapse_area`, reporting the
/// extrapolated collapse time: `area / 2 pi` past the current time for curve
/// shortening (its area decays at rate `2 pi`), `area / rate` from the last
/// measured decay rate for affine shortening.
pub fn evolve_to<T: Real>(poly: &Polygon<T>, t: T, params: &FlowParams<T>) -> Result<EvolvedCurve<T>> {
    evolve_traced(poly, t, params, None)
}

/// [`evolve_to`] that also records one [`TrajectoryRow`] per step.
pub fn evolve_traced<T: Real>(
    poly: &Polygon<T>,
    t: T,
    params: &FlowParams<T>,
    mut trace: Option<&mut Vec<TrajectoryRow<T>>>,
) -> Result<EvolvedCurve<T>> {
    params.validate()?;
    if !(t >= T::zero()) {
        return Err(Error::Parameter(format!("evolution time must be nonnegative, got {t}")));
    }
    if t == T::zero() {
        return Ok(EvolvedCurve::Alive(poly.clone()));
    }
    let sign = poly.orientation().sign::<T>();
    let cap = params.spacing * T::lit(0.5);
    let mut cur = remesh(poly, params.spacing, params.min_vertices).unwrap_or_else(|| poly.clone());
    let mut budget = min_nonadjacent_gap(&cur, cap);
    let mut time = T::zero();
    let mut rate = T::zero();
    let mut steps = 0usize;
    if let Some(tr) = trace.as_deref_mut() {
        tr.push(TrajectoryRow::of(0, time, &cur));
    }
    let two_pi = T::TAU();
    loop {
        let area = sign * cur.signed_area();
        if area < params.collapse_area {
            let remaining = match params.scheme {
                Scheme::Cs => area.max(T::zero()) / two_pi,
                Scheme::As if rate > T::zero() => area.max(T::zero()) / rate,
                Scheme::As => T::zero(),
            };
            if time + remaining <= t {
                return Ok(EvolvedCurve::Collapsed { time: time + remaining, point: cur.centroid() });
            }
        }
        if time >= t {
            return Ok(EvolvedCurve::Alive(cur));
        }
        if steps >= params.max_steps {
            return Err(Error::Timeout {
                steps,
                target: t.as_f64(),
                partial_time: time.as_f64(),
                partial_vertices: cur.vertices().iter().map(|p| (p.x.as_f64(), p.y.as_f64())).collect(),
            });
        }
        let mut dt = params.stable_dt(&cur).min(t - time);
        let mut accepted = None;
        for _ in 0..=8 {
            let (moved, disp) = advance(&cur, dt, params.scheme);
            let moved = Polygon::from_vertices_unchecked(moved);
            let (next, shift) = match remesh_tracked(&moved, params.spacing, params.min_vertices) {
                Some(r) => r,
                None => (moved, T::zero()),
            };
            // Nonadjacent edges approach each other by at most twice the
            // largest point displacement.
            let left = budget - (disp + shift) * T::lit(2.0);
            if left > T::zero() {
                accepted = Some((next, left));
                break;
            }
            let gap = min_nonadjacent_gap(&next, cap);
            if gap > T::zero() {
                accepted = Some((next, gap));
                break;
            }
            dt *= T::lit(0.5);
        }
        let Some((next, left)) = accepted else {
            return Err(Error::Numerical(format!(
                "self-intersection persists after 8 step halvings at t = {time}"
            )));
        };
        let next_area = sign * next.signed_area();
        if next_area <= T::zero() {
            // Turned inside out: the curve vanished during this step.
            return Ok(EvolvedCurve::Collapsed { time: time + dt, point: cur.centroid() });
        }
        rate = (area - next_area) / dt;
        time = if t - time <= dt { t } else { time + dt };
        cur = next;
        budget = left;
        steps += 1;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(TrajectoryRow::of(steps, time, &cur));
        }
    }
}

/// Evolves every curve independently, in parallel, keeping input order.
///
/// Results do not depend on scheduling: each curve is a pure function of
/// its polygon and the parameters.
pub fn evolve_family<T: Real>(polys: &[Polygon<T>], t: T, params: &FlowParams<T>) -> Result<Vec<EvolvedCurve<T>>> {
    let results: Vec<Result<EvolvedCurve<T>>> = polys.par_iter().map(|p| evolve_to(p, t, params)).collect();
    let mut out = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(c) => out.push(c),
            Err(e) => failures.push((i, e)),
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(Error::Family(failures))
    }
}

/// Radius at time `dt` of a circle of radius `r0` under curve shortening.
pub fn radial_cs<T: Real>(r0: T, dt: T) -> T {
    (r0 * r0 - (dt + dt)).max(T::zero()).sqrt()
}

/// Radius at time `dt` of a circle of radius `r0` under affine shortening.
pub fn radial_as<T: Real>(r0: T, dt: T) -> T {
    let p = T::lit(4.0 / 3.0);
    (r0.powf(p) - p * dt).max(T::zero()).powf(T::lit(0.75))
}
