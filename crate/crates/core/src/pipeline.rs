//! The full chain: pad, extract level lines, evolve them, paint them back.
//!
//! Runs in `f64`. Artifacts (images, SVG, JSON) are written by
//! [`run_pipeline`]; [`run_on_grid`] is the in-memory core.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::evolve::{evolve_traced, write_trajectory_csv, EvolvedCurve, FlowParams, Scheme, TrajectoryRow, TRAJECTORY_HEADER};
use crate::export::{curvature_map_svg, evolved_lines, initial_lines, lines_svg, tree_json};
use crate::error::{Error, Result};
use crate::oracle::{fd_evolve, FdParams};
use crate::pnm::{load_image, save_image};
use crate::reconstruct::{lipschitz_estimate, mask_outside, rasterize};
use crate::{EvolvedTree, ImageGrid, InclusionTree, Point, Polygon};
use crate::topomap::{build_inclusion_tree, extract_all, nudge_levels, quantized_levels};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Border {
    /// The image frame stays put: the image is extended by edge replication
    /// far enough that the closing frame does not reach the domain.
    #[default]
    Fixed,
    /// The domain rectangle evolves with the lines; samples outside the
    /// evolved rectangle are set to 0.
    Evolve,
}

impl FromStr for Border {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(Border::Fixed),
            "evolve" => Ok(Border::Evolve),
            other => Err(Error::Parameter(format!("unknown border mode {other:?}; expected fixed or evolve"))),
        }
    }
}

/// Artifact paths; `None` skips the artifact.
#[derive(Clone, Debug, Default)]
pub struct Outputs {
    pub image: Option<PathBuf>,
    pub svg_before: Option<PathBuf>,
    pub svg_after: Option<PathBuf>,
    pub curvature_map: Option<PathBuf>,
    pub tree_json: Option<PathBuf>,
    pub oracle_diff: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub input: PathBuf,
    /// Evolution time.
    pub t: f64,
    pub scheme: Scheme,
    /// Quantization step between extraction levels.
    pub quant: f64,
    pub offset: f64,
    /// Target vertex spacing of level lines, pixels.
    pub precision: f64,
    pub border: Border,
    /// Close lines against a frame around the image. Without it, any line
    /// reaching the image edge is a geometry error.
    pub pad: bool,
    /// Run `LLS(t - s)` after `LLS(s)` instead of `LLS(t)`.
    pub split: Option<f64>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Largest value written to PGM/PNG outputs.
    pub maxval: u32,
    /// Include vertex lists in the tree JSON.
    pub tree_vertices: bool,
    pub outputs: Outputs,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, t: f64, scheme: Scheme) -> Self {
        PipelineConfig {
            input: input.into(),
            t,
            scheme,
            quant: 1.0,
            offset: 0.5,
            precision: 0.1,
            border: Border::Fixed,
            pad: true,
            split: None,
            threads: None,
            maxval: 255,
            tree_vertices: false,
            outputs: Outputs::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Error::Parameter(format!("{what} must be positive and finite, got {v}"));
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::Parameter(format!("scale t must be >= 0, got {}", self.t)));
        }
        if !(self.quant > 0.0) || !self.quant.is_finite() {
            return Err(bad("quantization step", self.quant));
        }
        if !(self.precision > 0.0) || !self.precision.is_finite() {
            return Err(bad("precision", self.precision));
        }
        if !self.offset.is_finite() {
            return Err(Error::Parameter(format!("offset must be finite, got {}", self.offset)));
        }
        if let Some(s) = self.split {
            if !(s >= 0.0 && s <= self.t) {
                return Err(Error::Parameter(format!("split point {s} must lie in [0, {}]", self.t)));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Parameter("threads must be at least 1".into()));
        }
        Ok(())
    }

    fn flow(&self) -> FlowParams<f64> {
        FlowParams::new(self.scheme, self.precision)
    }
}

/// Extraction levels with the values painted just below and just above
/// each, plus the value of the region touching the frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPlan {
    pub levels: Vec<f64>,
    pub below: Vec<f64>,
    pub above: Vec<f64>,
    pub background: f64,
}

/// Value a sample `v` is painted with after a quantized round trip:
/// the midpoint of the quantization cell containing it, where a sample lying
/// exactly on a level belongs to the cell below.
pub fn quantize_value(v: f64, quant: f64, offset: f64) -> f64 {
    offset + quant * (((v - offset) / quant).ceil() - 1.0) + 0.5 * quant
}

fn nominal_level(level: f64, quant: f64, offset: f64) -> f64 {
    offset + quant * ((level - offset) / quant).round()
}

/// Levels `offset + k*quant` on `padded`, painted with their cell midpoints.
pub fn quantized_plan(padded: &ImageGrid, quant: f64, offset: f64, frame: f64) -> Result<LevelPlan> {
    let levels = quantized_levels(padded, quant, offset)?;
    let nominal: Vec<f64> = levels.iter().map(|&l| nominal_level(l, quant, offset)).collect();
    Ok(LevelPlan {
        below: nominal.iter().map(|n| n - 0.5 * quant).collect(),
        above: nominal.iter().map(|n| n + 0.5 * quant).collect(),
        levels,
        background: quantize_value(frame, quant, offset),
    })
}

/// Per-stage wall-clock timings and counts for one evolution.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StageReport {
    pub t: f64,
    pub width: usize,
    pub height: usize,
    pub margin: usize,
    pub levels: usize,
    pub lines: usize,
    pub vertices_initial: usize,
    pub collapsed: usize,
    pub surviving: usize,
    pub vertices_final: usize,
    pub domain_collapsed: bool,
    pub timings_ms: BTreeMap<&'static str, f64>,
}

/// Result of one evolution of a grid.
#[derive(Clone, Debug)]
pub struct Evolution {
    /// Output on the input's own `width x height` grid.
    pub output: ImageGrid,
    /// Lines of the padded grid before evolution.
    pub initial: InclusionTree,
    pub evolved: EvolvedTree,
    /// Samples added on each side before extraction; line coordinates are
    /// relative to the padded grid.
    pub margin: usize,
    pub trajectories: Vec<(u32, Vec<TrajectoryRow<f64>>)>,
    pub report: StageReport,
}

/// Samples of frame padding for each border mode.
pub fn margin_for(config: &PipelineConfig, t: f64) -> usize {
    match (config.pad, config.border) {
        (false, _) => 0,
        (true, Border::Evolve) => 1,
        (true, Border::Fixed) => (3.0 * (2.0 * t).sqrt()).ceil() as usize + 3,
    }
}

fn pad(grid: &ImageGrid, config: &PipelineConfig, t: f64, frame: f64) -> (ImageGrid, usize) {
    let margin = margin_for(config, t);
    match (config.pad, config.border) {
        (false, _) => (grid.clone(), 0),
        (true, Border::Evolve) => (grid.pad_constant(frame), margin),
        (true, Border::Fixed) => (grid.extend_edges(margin - 1).pad_constant(frame), margin),
    }
}

fn domain_rectangle(width: usize, height: usize, margin: usize, spacing: f64) -> Result<Polygon> {
    let (x0, y0) = (margin as f64, margin as f64);
    let (x1, y1) = (x0 + (width - 1) as f64, y0 + (height - 1) as f64);
    let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    let mut pts = Vec::new();
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let n = (len / spacing).ceil().max(1.0) as usize;
        for k in 0..n {
            let s = k as f64 / n as f64;
            pts.push(Point::new(a.0 + (b.0 - a.0) * s, a.1 + (b.1 - a.1) * s));
        }
    }
    let poly = Polygon::new(pts)?;
    Ok(if poly.signed_area() < 0.0 { poly.reversed() } else { poly })
}

fn timed<R>(timings: &mut BTreeMap<&'static str, f64>, stage: &'static str, f: impl FnOnce() -> Result<R>) -> Result<R> {
    let start = Instant::now();
    let r = f().map_err(|e| e.in_stage(stage))?;
    *timings.entry(stage).or_default() += start.elapsed().as_secs_f64() * 1e3;
    Ok(r)
}

/// One evolution of `grid` for time `t`. `plan` chooses the levels on the
/// padded grid; `frame` is the padding value (0 in the plain pipeline).
pub fn evolve_grid(
    grid: &ImageGrid,
    config: &PipelineConfig,
    t: f64,
    frame: f64,
    plan: impl FnOnce(&ImageGrid) -> Result<LevelPlan>,
    trace: bool,
) -> Result<Evolution> {
    config.validate()?;
    let mut timings = BTreeMap::new();
    let (padded, margin) = timed(&mut timings, "pad", || Ok(pad(grid, config, t, frame)))?;
    let (w, h) = (padded.width(), padded.height());
    let plan = timed(&mut timings, "levels", || plan(&padded))?;

    let tree = timed(&mut timings, "extract", || {
        let mut lines = extract_all(&padded, &plan.levels, config.precision)?;
        let index: HashMap<u64, usize> = plan.levels.iter().enumerate().map(|(i, l)| (l.to_bits(), i)).collect();
        for line in &mut lines {
            let i = index[&line.level.to_bits()];
            line.assign_inner_value(plan.below[i], plan.above[i]);
        }
        Ok(lines)
    })?;
    let tree = timed(&mut timings, "tree", || build_inclusion_tree(tree))?;

    let flow = config.flow();
    let polys: Vec<&Polygon> = tree.lines().iter().map(|l| &l.polygon).collect();
    let (curves, trajectories) = timed(&mut timings, "evolve", || {
        type Traced = (EvolvedCurve<f64>, Vec<TrajectoryRow<f64>>);
        let results: Vec<Result<Traced>> = polys
            .par_iter()
            .map(|p| {
                let mut rows = Vec::new();
                let c = evolve_traced(p, t, &flow, trace.then_some(&mut rows))?;
                Ok((c, rows))
            })
            .collect();
        let mut curves = Vec::with_capacity(results.len());
        let mut traj = Vec::new();
        let mut failures = Vec::new();
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok((c, rows)) => {
                    curves.push(c);
                    if trace {
                        traj.push((tree.line(i).id.0, rows));
                    }
                }
                Err(e) => failures.push((i, e)),
            }
        }
        if failures.is_empty() {
            Ok((curves, traj))
        } else {
            Err(Error::Family(failures))
        }
    })?;

    let evolved = timed(&mut timings, "splice", || EvolvedTree::splice(&tree, &curves))?;
    let mut image = timed(&mut timings, "rasterize", || rasterize(&evolved, w, h, plan.background))?;

    let mut domain_collapsed = false;
    if config.border == Border::Evolve && config.pad {
        image = timed(&mut timings, "domain", || {
            let rect = domain_rectangle(grid.width(), grid.height(), margin, config.precision)?;
            match evolve_traced(&rect, t, &flow, None)? {
                EvolvedCurve::Alive(d) => mask_outside(&image, &d, 0.0),
                EvolvedCurve::Collapsed { .. } => {
                    domain_collapsed = true;
                    ImageGrid::constant(w, h, 0.0)
                }
            }
        })?;
    }
    let output = timed(&mut timings, "crop", || if margin > 0 { image.crop(margin) } else { Ok(image) })?;

    let report = StageReport {
        t,
        width: grid.width(),
        height: grid.height(),
        margin,
        levels: plan.levels.len(),
        lines: tree.len(),
        vertices_initial: tree.lines().iter().map(|l| l.polygon.len()).sum(),
        collapsed: evolved.collapses.len(),
        surviving: evolved.len(),
        vertices_final: evolved.nodes.iter().map(|n| n.polygon.len()).sum(),
        domain_collapsed,
        timings_ms: timings,
    };
    Ok(Evolution { output, initial: tree, evolved, margin, trajectories, report })
}

/// `LLS(t)` of `grid` under `config` (ignoring `config.input`), honoring
/// `config.split`. Returns the evolutions in the order they ran.
pub fn run_on_grid(grid: &ImageGrid, config: &PipelineConfig) -> Result<Vec<Evolution>> {
    run_on_grid_traced(grid, config, false)
}

fn run_on_grid_traced(grid: &ImageGrid, config: &PipelineConfig, trace: bool) -> Result<Vec<Evolution>> {
    config.validate()?;
    let plan = |p: &ImageGrid| quantized_plan(p, config.quant, config.offset, 0.0);
    match config.split {
        None => Ok(vec![evolve_grid(grid, config, config.t, 0.0, plan, trace)?]),
        Some(s) => {
            let first = evolve_grid(grid, config, s, 0.0, plan, trace)?;
            let second = evolve_grid(&first.output, config, config.t - s, 0.0, plan, trace)?;
            Ok(vec![first, second])
        }
    }
}

/// Sup and mean of `|a - b|` over samples at least `band` from the edge.
pub fn diff_norms(a: &ImageGrid, b: &ImageGrid, band: usize) -> (f64, f64) {
    let (w, h) = (a.width(), a.height());
    let mut sup: f64 = 0.0;
    let mut sum = 0.0;
    let mut n = 0usize;
    for y in band..h.saturating_sub(band) {
        for x in band..w.saturating_sub(band) {
            let d = (a.get(x, y) - b.get(x, y)).abs();
            sup = sup.max(d);
            sum += d;
            n += 1;
        }
    }
    (sup, if n > 0 { sum / n as f64 } else { 0.0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub border_band: usize,
    pub sup_diff: f64,
    pub mean_diff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub input: String,
    pub scheme: Scheme,
    pub t: f64,
    pub quant: f64,
    pub offset: f64,
    pub precision: f64,
    pub border: Border,
    pub pad: bool,
    pub split: Option<f64>,
    pub threads: Option<usize>,
    pub lipschitz_before: f64,
    pub lipschitz_after: f64,
    pub stages: Vec<StageReport>,
    pub total_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

/// Everything [`run_pipeline`] produced, for callers that want more than
/// the files.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub output: ImageGrid,
    pub evolutions: Vec<Evolution>,
    pub report: RunReport,
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parameter(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// Loads `config.input`, runs the chain and writes every requested artifact.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineRun> {
    config.validate()?;
    with_threads(config.threads, || run_pipeline_inner(config))?
}

fn run_pipeline_inner(config: &PipelineConfig) -> Result<PipelineRun> {
    let start = Instant::now();
    let input: ImageGrid = load_image(&config.input).map_err(|e| e.in_stage("load"))?;
    let trace = config.outputs.trajectory.is_some();
    let evolutions = run_on_grid_traced(&input, config, trace)?;
    let first = &evolutions[0];
    let last = evolutions.last().expect("at least one evolution");
    let output = last.output.clone();
    let (w, h) = (input.width(), input.height());
    let out = &config.outputs;

    let write = |stage: &'static str, f: &dyn Fn() -> Result<()>| f().map_err(|e| e.in_stage(stage));
    if let Some(p) = &out.image {
        write("write image", &|| save_image(p, &output, config.maxval))?;
    }
    if let Some(p) = &out.svg_before {
        write("write svg", &|| write_text(p, &lines_svg(&initial_lines(&first.initial), w, h, first.margin)))?;
    }
    if let Some(p) = &out.svg_after {
        write("write svg", &|| write_text(p, &lines_svg(&evolved_lines(&last.evolved), w, h, last.margin)))?;
    }
    if let Some(p) = &out.curvature_map {
        write("write curvature map", &|| write_text(p, &emit_curvature_map(&last.evolved, w, h, last.margin)))?;
    }
    if let Some(p) = &out.tree_json {
        write("write tree", &|| {
            let v = serde_json::json!({
                "initial": tree_json(&initial_lines(&first.initial), config.tree_vertices, first.margin),
                "evolved": tree_json(&evolved_lines(&last.evolved), config.tree_vertices, last.margin),
                "collapses": last.evolved.collapses.iter().map(|c| serde_json::json!({
                    "id": c.id.0,
                    "time": c.time,
                    "point": [c.point.x - last.margin as f64, c.point.y - last.margin as f64],
                })).collect::<Vec<_>>(),
            });
            write_text(p, &serde_json::to_string_pretty(&v).expect("json"))
        })?;
    }
    if let Some(p) = &out.trajectory {
        write("write trajectory", &|| {
            let mut buf = Vec::new();
            {
                use std::io::Write;
                writeln!(buf, "stage,{TRAJECTORY_HEADER}")?;
            }
            for (stage, ev) in evolutions.iter().enumerate() {
                for (id, rows) in &ev.trajectories {
                    let mut lines = Vec::new();
                    write_trajectory_csv(&mut lines, *id, rows)?;
                    for l in String::from_utf8_lossy(&lines).lines() {
                        buf.extend_from_slice(format!("{stage},{l}\n").as_bytes());
                    }
                }
            }
            fs::write(p, buf)?;
            Ok(())
        })?;
    }

    let oracle = match &out.oracle_diff {
        None => None,
        Some(p) => {
            let fd = fd_evolve(&input, &FdParams::new(config.t, config.scheme.into())).map_err(|e| e.in_stage("oracle"))?;
            let band = 3;
            let (sup, mean) = diff_norms(&output, &fd, band);
            let diff = ImageGrid::new(w, h, output.samples().iter().zip(fd.samples()).map(|(a, b)| a - b).collect())?;
            // Integer formats cannot hold negative values: center them on 128.
            let is_float = p.extension().is_some_and(|e| e.eq_ignore_ascii_case("llsf"));
            let diff = if is_float { diff } else { diff.map(|d| d + 128.0)? };
            write("write oracle diff", &|| save_image(p, &diff, 255))?;
            Some(OracleReport { border_band: band, sup_diff: sup, mean_diff: mean })
        }
    };

    let report = RunReport {
        input: config.input.display().to_string(),
        scheme: config.scheme,
        t: config.t,
        quant: config.quant,
        offset: config.offset,
        precision: config.precision,
        border: config.border,
        pad: config.pad,
        split: config.split,
        threads: config.threads,
        lipschitz_before: lipschitz_estimate(&EvolvedTree::from_initial(&first.initial)),
        lipschitz_after: lipschitz_estimate(&last.evolved),
        stages: evolutions.iter().map(|e| e.report.clone()).collect(),
        total_ms: start.elapsed().as_secs_f64() * 1e3,
        oracle,
    };
    if let Some(p) = &out.report {
        write("write report", &|| write_text(p, &serde_json::to_string_pretty(&report).expect("json")))?;
    }
    Ok(PipelineRun { output, evolutions, report })
}

/// Curvature map SVG of an evolved (or, via [`EvolvedTree::from_initial`],
/// initial) tree.
pub fn emit_curvature_map(tree: &EvolvedTree, width: usize, height: usize, margin: usize) -> String {
    curvature_map_svg(&evolved_lines(tree), width, height, margin)
}

/// A gray-level map for contrast tests.
#[derive(Clone, Debug, PartialEq)]
pub enum Lut {
    /// `v -> scale * v + shift`.
    Affine { scale: f64, shift: f64 },
    /// Piecewise linear through `(input, output)` knots sorted by input,
    /// extended linearly past the ends.
    Table(Vec<(f64, f64)>),
}

impl Lut {
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Lut::Affine { scale, shift } => scale * v + shift,
            Lut::Table(k) => {
                let i = k.partition_point(|&(x, _)| x <= v).clamp(1, k.len() - 1);
                let ((x0, y0), (x1, y1)) = (k[i - 1], k[i]);
                y0 + (y1 - y0) * (v - x0) / (x1 - x0)
            }
        }
    }

    /// `Some(true)` if strictly increasing, `Some(false)` if strictly
    /// decreasing, `None` otherwise.
    pub fn monotonicity(&self) -> Option<bool> {
        match self {
            Lut::Affine { scale, .. } if *scale > 0.0 => Some(true),
            Lut::Affine { scale, .. } if *scale < 0.0 => Some(false),
            Lut::Affine { .. } => None,
            Lut::Table(k) if k.len() < 2 || k.windows(2).any(|w| !(w[1].0 > w[0].0)) => None,
            Lut::Table(k) => {
                if k.windows(2).all(|w| w[1].1 > w[0].1) {
                    Some(true)
                } else if k.windows(2).all(|w| w[1].1 < w[0].1) {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }
}

impl FromStr for Lut {
    type Err = Error;
    /// `affine:SCALE,SHIFT` or `table:x0=y0,x1=y1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("cannot parse lut {s:?}; use affine:SCALE,SHIFT or table:X=Y,..."));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        if let Some(rest) = s.strip_prefix("affine:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            Ok(Lut::Affine { scale: num(a)?, shift: num(b)? })
        } else if let Some(rest) = s.strip_prefix("table:") {
            let knots = rest
                .split(',')
                .map(|kv| {
                    let (x, y) = kv.split_once('=').ok_or_else(bad)?;
                    Ok((num(x)?, num(y)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Lut::Table(knots))
        } else {
            Err(bad())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContrastReport {
    pub increasing: bool,
    /// Sup of `|LLS(lut(u)) - lut(LLS(u))|`.
    pub sup_diff: f64,
    pub mean_diff: f64,
    pub note: Option<String>,
}

/// Compares `LLS(t)(lut(u))` with `lut(LLS(t)(u))` on `grid`, extracting the
/// mapped image at the mapped levels `(lut(a) + lut(b)) / 2` of each cell
/// `[a, b]`. A decreasing lut is run and reported but carries no invariant.
pub fn run_contrast_test(grid: &ImageGrid, config: &PipelineConfig, lut: &Lut) -> Result<ContrastReport> {
    config.validate()?;
    let increasing = lut.monotonicity().ok_or_else(|| Error::Parameter("lut must be strictly monotone".into()))?;
    if config.split.is_some() {
        return Err(Error::Parameter("contrast test does not combine with split".into()));
    }
    let base = evolve_grid(grid, config, config.t, 0.0, |p| quantized_plan(p, config.quant, config.offset, 0.0), false)?;
    let mapped_input = grid.map(|v| lut.eval(v))?;
    let frame = lut.eval(0.0);
    let (q, o) = (config.quant, config.offset);
    let mapped = evolve_grid(
        &mapped_input,
        config,
        config.t,
        frame,
        |padded| {
            let (lo, hi) = grid.value_range();
            let (lo, hi) = (lo.min(0.0), hi.max(0.0));
            let mut cells = Vec::new();
            let mut k = ((lo - o) / q).floor() as i64;
            loop {
                let level = o + k as f64 * q;
                k += 1;
                if level >= hi {
                    break;
                }
                if level > lo {
                    let (a, b) = (lut.eval(level - 0.5 * q), lut.eval(level + 0.5 * q));
                    cells.push((0.5 * (a + b), a.min(b), a.max(b)));
                }
            }
            cells.sort_by(|x, y| x.0.total_cmp(&y.0));
            let wanted: Vec<f64> = cells.iter().map(|c| c.0).collect();
            let nudged = nudge_levels(padded, &wanted);
            // Nudging only drops levels from the top end.
            let cells = &cells[..nudged.len()];
            Ok(LevelPlan {
                levels: nudged,
                below: cells.iter().map(|c| c.1).collect(),
                above: cells.iter().map(|c| c.2).collect(),
                background: lut.eval(quantize_value(0.0, q, o)),
            })
        },
        false,
    )?;
    let expected = base.output.map(|v| lut.eval(v))?;
    let (sup, mean) = diff_norms(&mapped.output, &expected, 0);
    Ok(ContrastReport {
        increasing,
        sup_diff: sup,
        mean_diff: mean,
        note: (!increasing).then(|| {
            "decreasing lut: level lines reverse orientation; difference is reported, not asserted".to_string()
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_cells() {
        assert_eq!(quantize_value(3.0, 1.0, 0.5), 3.0);
        assert_eq!(quantize_value(0.0, 1.0, 0.5), 0.0);
        assert_eq!(quantize_value(2.2, 1.0, 0.0), 2.5);
        assert_eq!(quantize_value(2.0, 1.0, 0.0), 1.5);
        assert_eq!(quantize_value(7.0, 4.0, 0.5), 6.5);
    }

    #[test]
    fn zero_time_round_trip() {
        let g = ImageGrid::from_fn(12, 10, |x, y| ((x * 7 + y * 3) % 9) as f64).unwrap();
        let cfg = PipelineConfig::new("mem", 0.0, Scheme::Cs);
        let out = &run_on_grid(&g, &cfg).unwrap()[0];
        assert_eq!(out.output, g);
    }

    #[test]
    fn no_pad_edge_crossing_is_geometry() {
        let g = ImageGrid::from_fn(8, 8, |x, _| x as f64).unwrap();
        let cfg = PipelineConfig { pad: false, ..PipelineConfig::new("mem", 1.0, Scheme::Cs) };
        let err = run_on_grid(&g, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().starts_with("extract"));
    }

    #[test]
    fn identity_lut_is_exact() {
        let g = ImageGrid::from_fn(20, 20, |x, y| (12.0 - ((x as f64 - 9.5).powi(2) + (y as f64 - 9.5).powi(2)).sqrt()).max(0.0).round()).unwrap();
        let cfg = PipelineConfig::new("mem", 2.0, Scheme::Cs);
        let r = run_contrast_test(&g, &cfg, &Lut::Affine { scale: 1.0, shift: 0.0 }).unwrap();
        assert_eq!(r.sup_diff, 0.0);
        assert!(run_contrast_test(&g, &cfg, &Lut::Table(vec![(0.0, 0.0), (5.0, 9.0), (9.0, 1.0)])).is_err());
    }

    #[test]
    fn lut_parsing() {
        assert_eq!("affine:2,17".parse::<Lut>().unwrap(), Lut::Affine { scale: 2.0, shift: 17.0 });
        let t: Lut = "table:0=0,10=30,20=35".parse().unwrap();
        assert_eq!(t.eval(5.0), 15.0);
        assert_eq!(t.eval(30.0), 40.0);
        assert_eq!(t.monotonicity(), Some(true));
        assert!("bogus".parse::<Lut>().is_err());
    }

    #[test]
    fn evolve_border_masks_corners() {
        let g = ImageGrid::constant(16, 16, 10.0).unwrap();
        let cfg = PipelineConfig { border: Border::Evolve, precision: 0.25, ..PipelineConfig::new("mem", 2.0, Scheme::Cs) };
        let out = &run_on_grid(&g, &cfg).unwrap()[0].output;
        assert_eq!(out.get(0, 0), 0.0);
        assert_eq!(out.get(8, 8), 10.0);
        let fixed = &run_on_grid(&g, &PipelineConfig { precision: 0.25, ..PipelineConfig::new("mem", 2.0, Scheme::Cs) }).unwrap()[0].output;
        assert!(fixed.samples().iter().all(|&v| v == 10.0));
    }
}
