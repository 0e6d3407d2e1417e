//! Sampled images and their bilinear interpolate.
//!
//! Samples sit at integer coordinates `(x, y)`, `0 <= x < width`,
//! `0 <= y < height`. The unit square `[x, x+1] x [y, y+1]` between four
//! samples is a *dual pixel*; on it the interpolate is the unique function
//! `a + b*x + c*y + d*x*y` matching the four corners.

use rayon::prelude::*;

use crate::curves::Point;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid<T> {
    width: usize,
    height: usize,
    samples: Vec<T>,
    range: (T, T),
}

impl<T: Real> ImageGrid<T> {
    /// Builds a grid from row-major samples.
    pub fn new(width: usize, height: usize, samples: Vec<T>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::Parameter(format!(
                "image must be at least 2x2 samples, got {width}x{height}"
            )));
        }
        if samples.len() != width * height {
            return Err(Error::Parameter(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "sample ({}, {}) is not finite",
                i % width,
                i / width
            )));
        }
        let range = samples
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Ok(ImageGrid { width, height, samples, range })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    pub fn constant(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    /// `(min, max)` over all samples.
    #[inline]
    pub fn value_range(&self) -> (T, T) {
        self.range
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.samples[y * self.width + x]
    }

    /// Corners of the dual pixel with lower-left sample `(x, y)`, ordered
    /// `(u00, u10, u01, u11)`.
    #[inline]
    pub fn cell_corners(&self, x: usize, y: usize) -> [T; 4] {
        let i = y * self.width + x;
        [
            self.samples[i],
            self.samples[i + 1],
            self.samples[i + self.width],
            self.samples[i + self.width + 1],
        ]
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.width, self.height, self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Surrounds the image with a one-sample frame of zeros so the domain
    /// boundary is a zero level line.
    pub fn pad_zero(&self) -> Self {
        self.pad_constant(T::zero())
    }

    /// Surrounds the image with a one-sample frame of `value`.
    pub fn pad_constant(&self, value: T) -> Self {
        let (w, h) = (self.width + 2, self.height + 2);
        let mut samples = vec![value; w * h];
        for y in 0..self.height {
            let src = &self.samples[y * self.width..(y + 1) * self.width];
            samples[(y + 1) * w + 1..(y + 1) * w + 1 + self.width].copy_from_slice(src);
        }
        let (lo, hi) = self.range;
        ImageGrid { width: w, height: h, samples, range: (lo.min(value), hi.max(value)) }
    }

    /// Grows the image by `margin` samples on every side, repeating the
    /// nearest edge sample.
    pub fn extend_edges(&self, margin: usize) -> Self {
        let (w, h) = (self.width + 2 * margin, self.height + 2 * margin);
        let mut samples = Vec::with_capacity(w * h);
        for y in 0..h {
            let sy = y.saturating_sub(margin).min(self.height - 1);
            for x in 0..w {
                let sx = x.saturating_sub(margin).min(self.width - 1);
                samples.push(self.samples[sy * self.width + sx]);
            }
        }
        ImageGrid { width: w, height: h, samples, range: self.range }
    }

    /// Removes `margin` samples on every side.
    pub fn crop(&self, margin: usize) -> Result<Self> {
        if self.width < 2 * margin + 2 || self.height < 2 * margin + 2 {
            return Err(Error::Parameter(format!("cannot crop {margin} from {}x{}", self.width, self.height)));
        }
        Self::from_fn(self.width - 2 * margin, self.height - 2 * margin, |x, y| {
            self.get(x + margin, y + margin)
        })
    }

    /// Bilinear interpolate at `p`, which must lie in `[0, w-1] x [0, h-1]`.
    pub fn bilinear_eval(&self, p: Point<T>) -> Result<T> {
        let xmax = T::lit((self.width - 1) as f64);
        let ymax = T::lit((self.height - 1) as f64);
        if !(p.x >= T::zero() && p.x <= xmax && p.y >= T::zero() && p.y <= ymax) {
            return Err(Error::Domain { x: p.x.as_f64(), y: p.y.as_f64() });
        }
        let cx = p.x.floor().to_usize().unwrap_or(0).min(self.width - 2);
        let cy = p.y.floor().to_usize().unwrap_or(0).min(self.height - 2);
        let fx = p.x - T::lit(cx as f64);
        let fy = p.y - T::lit(cy as f64);
        Ok(bilinear_local(self.cell_corners(cx, cy), fx, fy))
    }
}

/// Bilinear patch with corners `(u00, u10, u01, u11)` evaluated at local `(fx, fy)`.
#[inline]
pub fn bilinear_local<T: Real>(c: [T; 4], fx: T, fy: T) -> T {
    let one = T::one();
    c[0] * (one - fx) * (one - fy) + c[1] * fx * (one - fy) + c[2] * (one - fx) * fy + c[3] * fx * fy
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PixelKind {
    Planar,
    Saddle,
    Flat,
}

/// Classification of one dual pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualPixelAnalysis<T> {
    pub kind: PixelKind,
    pub saddle_level: Option<T>,
    /// Local coordinates inside the open unit square.
    pub saddle_point: Option<Point<T>>,
}

/// Classifies a dual pixel from its corners `(u00, u10, u01, u11)`.
///
/// The stationary point of `u00 + b x + c y + d x y` sits at
/// `((u00-u01)/d, (u00-u10)/d)` with value `(u00 u11 - u10 u01)/d`; it counts
/// as a saddle only when strictly inside the square.
pub fn saddle_analysis<T: Real>(corners: [T; 4]) -> DualPixelAnalysis<T> {
    let [u00, u10, u01, u11] = corners;
    if u00 == u10 && u00 == u01 && u00 == u11 {
        return DualPixelAnalysis { kind: PixelKind::Flat, saddle_level: None, saddle_point: None };
    }
    let d = u00 + u11 - u10 - u01;
    if d != T::zero() {
        let sx = (u00 - u01) / d;
        let sy = (u00 - u10) / d;
        if sx > T::zero() && sx < T::one() && sy > T::zero() && sy < T::one() {
            return DualPixelAnalysis {
                kind: PixelKind::Saddle,
                saddle_level: Some((u00 * u11 - u10 * u01) / d),
                saddle_point: Some(Point::new(sx, sy)),
            };
        }
    }
    DualPixelAnalysis { kind: PixelKind::Planar, saddle_level: None, saddle_point: None }
}

/// Sorted, deduplicated critical levels of the bilinear interpolate.
///
/// Collects saddle levels, values of flat dual pixels, and sample values at
/// local extrema of the sample lattice. An extremum is a sample with no
/// 8-neighbour strictly above it (or none strictly below); plateaus and the
/// image border therefore contribute their values. Saddles sitting exactly
/// on a sample are included too.
pub fn critical_levels<T: Real>(grid: &ImageGrid<T>) -> Vec<T> {
    let (w, h) = (grid.width(), grid.height());
    let mut levels: Vec<T> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let mut row = Vec::new();
            for x in 0..w {
                if x + 1 < w && y + 1 < h {
                    let c = grid.cell_corners(x, y);
                    let a = saddle_analysis(c);
                    match a.kind {
                        PixelKind::Flat => row.push(c[0]),
                        PixelKind::Saddle => row.push(a.saddle_level.unwrap()),
                        PixelKind::Planar => {}
                    }
                }
                let v = grid.get(x, y);
                let (mut any_above, mut any_below) = (false, false);
                for ny in y.saturating_sub(1)..(y + 2).min(h) {
                    for nx in x.saturating_sub(1)..(x + 2).min(w) {
                        let n = grid.get(nx, ny);
                        any_above |= n > v;
                        any_below |= n < v;
                    }
                }
                if !any_above || !any_below || (x > 0 && y > 0 && x + 1 < w && y + 1 < h && sample_saddle(grid, x, y)) {
                    row.push(v);
                }
            }
            row
        })
        .collect();
    sort_dedup(&mut levels, T::dedup_tolerance());
    levels
}

/// A sample is a saddle of the bilinear surface when the sign of
/// `neighbour - sample` changes at least four times around its 8-neighbour
/// ring (equal neighbours skipped).
fn sample_saddle<T: Real>(grid: &ImageGrid<T>, x: usize, y: usize) -> bool {
    const RING: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
    let v = grid.get(x, y);
    let signs: Vec<bool> = RING
        .iter()
        .map(|&(dx, dy)| grid.get((x as isize + dx) as usize, (y as isize + dy) as usize))
        .filter(|&n| n != v)
        .map(|n| n > v)
        .collect();
    let changes = (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count();
    changes >= 4
}

pub(crate) fn sort_dedup<T: Real>(values: &mut Vec<T>, tol: T) {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<T> = Vec::with_capacity(values.len());
    for &v in values.iter() {
        match out.last() {
            Some(&last) if v - last <= tol => {}
            _ => out.push(v),
        }
    }
    *values = out;
}

/// The contrast flattening `f_eps` that turns a function with critical
/// levels `l_1 < ... < l_n` into a very simple one.
///
/// ```text
/// t                    t <= l_1 - eps
/// l_k - k eps          |t - l_k| <= eps
/// t - k eps            l_k + eps < t < l_{k+1} - eps
/// t - n eps            t > l_n + eps
/// ```
///
/// Each plateau collapses a band of width `2 eps` around a critical level.
/// The map is nondecreasing and moves values by at most `n eps`; it is
/// 1-Lipschitz on every branch but steps up by `eps` where a plateau ends.
pub fn very_simple_map<T: Real>(t: T, epsilon: T, critical: &[T]) -> T {
    // First critical level with l >= t - eps.
    let idx = critical.partition_point(|&l| l < t - epsilon);
    if let Some(&l) = critical.get(idx) {
        if (t - l).abs() <= epsilon {
            return l - T::lit((idx + 1) as f64) * epsilon;
        }
    }
    // Here t lies strictly inside a gap; idx levels are below it.
    t - T::lit(idx as f64) * epsilon
}

/// Applies [`very_simple_map`] to every value after checking
/// `0 < eps < min gap / 2`.
pub fn approx_very_simple<T: Real>(values: &[T], epsilon: T, critical: &[T]) -> Result<Vec<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    for pair in critical.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::Parameter(format!(
                "critical levels must be strictly increasing: ({}, {})",
                pair[0], pair[1]
            )));
        }
        if !(epsilon + epsilon < pair[1] - pair[0]) {
            return Err(Error::Parameter(format!(
                "epsilon {epsilon} is not below half the gap between critical levels {} and {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(values.iter().map(|&v| very_simple_map(v, epsilon, critical)).collect())
}
