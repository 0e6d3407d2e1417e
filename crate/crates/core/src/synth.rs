//! Synthetic test images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{make_radial, RadialProfile};
use crate::ImageGrid;

/// `max(0, peak - |p - c|)` with the center at the middle sample.
pub fn cone(size: usize, peak: f64) -> ImageGrid {
    let c = (size / 2) as f64;
    make_radial(size, size, RadialProfile::Cone { peak, slope: 1.0 }, (c, c)).expect("size >= 2")
}

/// Alternating `low`/`high` blocks of `cell` samples.
pub fn checkerboard(size: usize, cell: usize, low: f64, high: f64) -> ImageGrid {
    ImageGrid::from_fn(size, size, |x, y| if (x / cell + y / cell).is_multiple_of(2) { low } else { high }).expect("size >= 2")
}

/// Two equal Gaussian bumps side by side, joined through a saddle.
pub fn two_bump(size: usize, amplitude: f64) -> ImageGrid {
    let s = size as f64;
    let (c1, c2, cy, sigma) = (0.34 * s, 0.66 * s, 0.5 * s, 0.11 * s);
    ImageGrid::from_fn(size, size, |x, y| {
        let (x, y) = (x as f64, y as f64);
        let g = |cx: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * sigma * sigma)).exp();
        amplitude * (g(c1) + g(c2))
    })
    .expect("size >= 2")
}

/// A seeded sum of Gaussian blobs rescaled to `[0, amplitude]`.
pub fn random_smooth(size: usize, amplitude: f64, seed: u64) -> ImageGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let blobs: Vec<(f64, f64, f64, f64)> = (0..8)
        .map(|_| {
            (
                rng.gen_range(0.2 * s..0.8 * s),
                rng.gen_range(0.2 * s..0.8 * s),
                rng.gen_range(0.05 * s..0.15 * s),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    let raw = ImageGrid::from_fn(size, size, |x, y| {
        let (x, y) = (x as f64, y as f64);
        blobs.iter().map(|&(cx, cy, r, a)| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * r * r)).exp()).sum()
    })
    .expect("size >= 2");
    let (lo, hi) = raw.value_range();
    let span = if hi > lo { hi - lo } else { 1.0 };
    raw.map(|v| (v - lo) / span * amplitude).expect("finite")
}

/// Flat shapes on a flat background: a disk, a rectangle, a triangle and a
/// ring with a hole, the kind of piecewise-constant image a scanner makes
/// of a drawing.
pub fn cartoon(size: usize) -> ImageGrid {
    let s = size as f64;
    ImageGrid::from_fn(size, size, |x, y| {
        let (x, y) = (x as f64 / s, y as f64 / s);
        let disk = (x - 0.3).powi(2) + (y - 0.3).powi(2) < 0.15f64.powi(2);
        let rect = (0.55..0.85).contains(&x) && (0.15..0.4).contains(&y);
        let tri = y > 0.55 && y < 0.85 && (x - 0.3).abs() < (y - 0.55) * 0.7;
        let d = ((x - 0.7).powi(2) + (y - 0.7).powi(2)).sqrt();
        if disk {
            50.0
        } else if rect {
            35.0
        } else if tri {
            20.0
        } else if (0.08..0.16).contains(&d) {
            45.0
        } else if d < 0.08 {
            5.0
        } else {
            12.0
        }
    })
    .expect("size >= 2")
}

/// Every sample rounded to the nearest integer.
pub fn rounded(grid: &ImageGrid) -> ImageGrid {
    grid.map(f64::round).expect("finite")
}
