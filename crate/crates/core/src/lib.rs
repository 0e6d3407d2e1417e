//! Level lines shortening.
//!
//! An image is smoothed by extracting every level line of its bilinear
//! interpolate, moving each line independently by curve shortening (or
//! affine shortening), and painting the evolved lines back into an image.
//! The result approximates mean (affine) curvature motion while staying
//! exactly contrast invariant.
//!
//! Every numeric module is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the reference `f64` precision.

// `!(a > b)` is used deliberately so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod error;
pub mod evolve;
pub mod export;
pub mod grid;
pub mod oracle;
pub mod pipeline;
pub mod pnm;
pub mod reconstruct;
pub mod scalar;
pub mod synth;
pub mod topomap;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point = curves::Point<f64>;
pub type Polygon = curves::Polygon<f64>;
pub type ImageGrid = grid::ImageGrid<f64>;
pub type LevelLine = topomap::LevelLine<f64>;
pub type InclusionTree = topomap::InclusionTree<f64>;
pub type FlowParams = evolve::FlowParams<f64>;
pub type EvolvedCurve = evolve::EvolvedCurve<f64>;
pub type EvolvedTree = reconstruct::EvolvedTree<f64>;
pub type FdParams = oracle::FdParams<f64>;

pub type Polygon32 = curves::Polygon<f32>;
pub type ImageGrid32 = grid::ImageGrid<f32>;
pub type FlowParams32 = evolve::FlowParams<f32>;
