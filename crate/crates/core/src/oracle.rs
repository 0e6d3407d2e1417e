//! Reference solutions: an explicit finite-difference solver for mean and
//! affine curvature motion, and closed-form evolutions of radial images.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::Scheme;
use crate::grid::ImageGrid;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvaturePower {
    /// Mean curvature motion.
    One,
    /// Affine curvature motion, `sgn(k)|k|^(1/3)`.
    OneThird,
}

impl From<Scheme> for CurvaturePower {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Cs => CurvaturePower::One,
            Scheme::As => CurvaturePower::OneThird,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdParams<T> {
    pub dt: T,
    /// Regularizer added to `|Du|^2` inside the curvature.
    pub eps_reg: T,
    pub t_end: T,
    pub power: CurvaturePower,
}

impl<T: Real> FdParams<T> {
    pub const MAX_DT: f64 = 0.25;

    pub fn new(t_end: T, power: CurvaturePower) -> Self {
        FdParams { dt: T::lit(0.1), eps_reg: T::lit(1e-4), t_end, power }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt <= T::lit(Self::MAX_DT)) {
            return Err(Error::Parameter(format!("fd time step {} violates 0 < dt <= 0.25", self.dt)));
        }
        if !(self.eps_reg > T::zero()) || !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Parameter("fd regularizer must be positive and t_end finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Reflects an out-of-range index about the first/last sample.
#[inline]
fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    j.clamp(0, n - 1) as usize
}

fn speed_at<T: Real>(u: &[T], w: usize, h: usize, x: usize, y: usize, eps2: T, power: CurvaturePower) -> T {
    let at = |dx: isize, dy: isize| u[mirror(y as isize + dy, h) * w + mirror(x as isize + dx, w)];
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let c = at(0, 0);
    let ux = (at(1, 0) - at(-1, 0)) * half;
    let uy = (at(0, 1) - at(0, -1)) * half;
    let uxx = at(1, 0) - two * c + at(-1, 0);
    let uyy = at(0, 1) - two * c + at(0, -1);
    let uxy = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) * T::lit(0.25);
    let g2 = ux * ux + uy * uy;
    if g2 == T::zero() {
        return T::zero();
    }
    let num = uxx * (uy * uy + eps2) - two * ux * uy * uxy + uyy * (ux * ux + eps2);
    let k = num / (g2 + eps2).powf(T::lit(1.5));
    let k = match power {
        CurvaturePower::One => k,
        CurvaturePower::OneThird => k.signum() * k.abs().cbrt(),
    };
    g2.sqrt() * k
}

/// Explicit central-difference time stepping with mirror (Neumann) boundary.
/// The last step is shortened to land on `t_end`.
pub fn fd_evolve<T: Real>(grid: &ImageGrid<T>, params: &FdParams<T>) -> Result<ImageGrid<T>> {
    params.validate()?;
    let (w, h) = (grid.width(), grid.height());
    let eps2 = params.eps_reg * params.eps_reg;
    let mut u = grid.samples().to_vec();
    let mut next = u.clone();
    let mut t = T::zero();
    while t < params.t_end {
        let dt = params.dt.min(params.t_end - t);
        next.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            for (x, out) in row.iter_mut().enumerate() {
                *out = u[y * w + x] + dt * speed_at(&u, w, h, x, y, eps2, params.power);
            }
        });
        std::mem::swap(&mut u, &mut next);
        t += dt;
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("finite-difference solution became non-finite".into()));
    }
    ImageGrid::new(w, h, u)
}

/// A profile `r -> value` for radially symmetric images.
#[derive(Clone)]
pub enum RadialProfile<T> {
    /// `max(0, peak - slope * r)`.
    Cone { peak: T, slope: T },
    Constant(T),
    /// Piecewise linear through `(r, value)` knots sorted by `r`, constant
    /// beyond the end knots.
    Table(Vec<(T, T)>),
    Gaussian { amplitude: T, sigma: T },
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> fmt::Debug for RadialProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Cone { peak, slope } => write!(f, "Cone {{ peak: {peak}, slope: {slope} }}"),
            RadialProfile::Constant(v) => write!(f, "Constant({v})"),
            RadialProfile::Table(k) => write!(f, "Table({} knots)", k.len()),
            RadialProfile::Gaussian { amplitude, sigma } => {
                write!(f, "Gaussian {{ amplitude: {amplitude}, sigma: {sigma} }}")
            }
            RadialProfile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: Real> RadialProfile<T> {
    pub fn eval(&self, r: T) -> T {
        match self {
            RadialProfile::Cone { peak, slope } => (*peak - *slope * r).max(T::zero()),
            RadialProfile::Constant(v) => *v,
            RadialProfile::Table(knots) => table_eval(knots, r),
            RadialProfile::Gaussian { amplitude, sigma } => *amplitude * (-(r * r) / (T::lit(2.0) * *sigma * *sigma)).exp(),
            RadialProfile::Custom(f) => f(r),
        }
    }

    /// `g` applied after this profile.
    pub fn then(self, g: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        RadialProfile::Custom(Arc::new(move |r| g(self.eval(r))))
    }
}

fn table_eval<T: Real>(knots: &[(T, T)], r: T) -> T {
    match knots {
        [] => T::zero(),
        [(_, v)] => *v,
        _ => {
            let i = knots.partition_point(|&(k, _)| k <= r);
            if i == 0 {
                return knots[0].1;
            }
            if i == knots.len() {
                return knots[i - 1].1;
            }
            let ((r0, v0), (r1, v1)) = (knots[i - 1], knots[i]);
            v0 + (v1 - v0) * (r - r0) / (r1 - r0)
        }
    }
}

/// A radial image: `profile(|p - center|)` sampled on a `width x height` grid.
#[derive(Clone, Debug)]
pub struct RadialImage<T: Real> {
    pub width: usize,
    pub height: usize,
    pub center: (T, T),
    pub profile: RadialProfile<T>,
}

fn sample_radial<T: Real>(desc: &RadialImage<T>, radius_map: impl Fn(T) -> T) -> Result<ImageGrid<T>> {
    let (cx, cy) = desc.center;
    ImageGrid::from_fn(desc.width, desc.height, |x, y| {
        let dx = T::lit(x as f64) - cx;
        let dy = T::lit(y as f64) - cy;
        desc.profile.eval(radius_map((dx * dx + dy * dy).sqrt()))
    })
}

pub fn make_radial<T: Real>(
    width: usize,
    height: usize,
    profile: RadialProfile<T>,
    center: (T, T),
) -> Result<ImageGrid<T>> {
    sample_radial(&RadialImage { width, height, center, profile }, |r| r)
}

/// Radius at time 0 of the circle that has radius `r` at time `t`.
pub fn backward_radius<T: Real>(r: T, t: T, scheme: Scheme) -> T {
    match scheme {
        Scheme::Cs => (r * r + t + t).sqrt(),
        Scheme::As => {
            let p = T::lit(4.0 / 3.0);
            (r.powf(p) + p * t).powf(T::lit(0.75))
        }
    }
}

/// Every level circle of the radial image shrinks independently, so the
/// evolved value at radius `r` is the initial profile at the backward radius.
pub fn exact_radial_evolution<T: Real>(desc: &RadialImage<T>, t: T, scheme: Scheme) -> Result<ImageGrid<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Parameter(format!("evolution time must be >= 0, got {t}")));
    }
    sample_radial(desc, |r| backward_radius(r, t, scheme))
}
