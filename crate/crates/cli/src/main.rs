use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lls::evolve::Scheme;
use lls::pipeline::{run_contrast_test, run_pipeline, Border, Lut, Outputs, PipelineConfig};
use lls::pnm::{load_image, save_image};
use lls::synth;

#[derive(Parser)]
#[command(name = "lls", version, about = "Smooth images by shortening their level lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve every level line of an image and write the results.
    Run(RunArgs),
    /// Check that a gray-level map commutes with the evolution.
    Contrast(ContrastArgs),
    /// Write a synthetic test image.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Cs,
    As,
}

#[derive(Clone, Copy, ValueEnum)]
enum BorderArg {
    Fixed,
    Evolve,
}

#[derive(Args)]
struct Common {
    /// Input image (PGM, grayscale PNG or LLSF float dump).
    input: PathBuf,
    /// Evolution time.
    #[arg(long, short = 't')]
    scale: f64,
    #[arg(long, value_enum, default_value = "cs")]
    scheme: SchemeArg,
    /// Spacing between extraction levels.
    #[arg(long, default_value_t = 1.0)]
    quant: f64,
    /// Level offset: levels are offset + k * quant.
    #[arg(long, default_value_t = 0.5)]
    offset: f64,
    /// Vertex spacing of the level lines, in pixels.
    #[arg(long, default_value_t = 0.1)]
    precision: f64,
    #[arg(long, value_enum, default_value = "fixed")]
    border: BorderArg,
    /// Do not pad the image; lines reaching the edge are then an error.
    #[arg(long)]
    no_pad: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Largest value written to PGM/PNG images.
    #[arg(long, default_value_t = 255)]
    maxval: u32,
}

impl Common {
    fn config(&self) -> PipelineConfig {
        let scheme = match self.scheme {
            SchemeArg::Cs => Scheme::Cs,
            SchemeArg::As => Scheme::As,
        };
        PipelineConfig {
            quant: self.quant,
            offset: self.offset,
            precision: self.precision,
            border: match self.border {
                BorderArg::Fixed => Border::Fixed,
                BorderArg::Evolve => Border::Evolve,
            },
            pad: !self.no_pad,
            threads: self.threads,
            maxval: self.maxval,
            ..PipelineConfig::new(&self.input, self.scale, scheme)
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Run LLS(t - s) after LLS(s).
    #[arg(long, value_name = "S")]
    split: Option<f64>,
    /// Output image; the extension picks the format (.png, .llsf, .pgm, .ascii.pgm).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long)]
    svg_before: Option<PathBuf>,
    #[arg(long)]
    svg_after: Option<PathBuf>,
    #[arg(long)]
    curvature_map: Option<PathBuf>,
    #[arg(long)]
    tree_json: Option<PathBuf>,
    /// Include vertex lists in the tree JSON.
    #[arg(long)]
    tree_vertices: bool,
    /// Difference against the finite-difference solver (offset by 128 in integer formats).
    #[arg(long)]
    oracle_diff: Option<PathBuf>,
    /// Machine-readable run report (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-curve CSV of area, length and isoperimetric ratio at every step.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Args)]
struct ContrastArgs {
    #[command(flatten)]
    common: Common,
    /// `affine:SCALE,SHIFT` or `table:X=Y,...`.
    #[arg(long)]
    lut: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoImage {
    Cone,
    Checkerboard,
    TwoBump,
    RandomSmooth,
    Cartoon,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(value_enum)]
    image: DemoImage,
    #[arg(long, default_value_t = 128)]
    size: usize,
    /// Seed for randomized images.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep fractional values (only meaningful for .llsf output).
    #[arg(long)]
    no_round: bool,
    #[arg(long, short = 'o')]
    output: PathBuf,
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = args.common.config();
    config.split = args.split;
    config.tree_vertices = args.tree_vertices;
    config.outputs = Outputs {
        image: args.output,
        svg_before: args.svg_before,
        svg_after: args.svg_after,
        curvature_map: args.curvature_map,
        tree_json: args.tree_json,
        oracle_diff: args.oracle_diff,
        report: args.report,
        trajectory: args.trajectory,
    };
    let run = run_pipeline(&config)?;
    let last = run.report.stages.last().expect("one stage");
    eprintln!(
        "{} lines at {} levels, {} collapsed, {:.0} ms",
        last.lines, last.levels, last.collapsed, run.report.total_ms
    );
    if let Some(o) = &run.report.oracle {
        eprintln!("oracle: sup {:.3}, mean {:.3}", o.sup_diff, o.mean_diff);
    }
    Ok(())
}

fn contrast(args: ContrastArgs) -> Result<()> {
    let config = args.common.config();
    let lut: Lut = args.lut.parse()?;
    let grid = load_image(&config.input).with_context(|| format!("loading {}", config.input.display()))?;
    let report = run_contrast_test(&grid, &config, &lut)?;
    let text = serde_json::to_string_pretty(&report)?;
    match args.report {
        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn demo(args: DemoArgs) -> Result<()> {
    let n = args.size;
    let grid = match args.image {
        DemoImage::Cone => synth::cone(n, 40.0),
        DemoImage::Checkerboard => synth::checkerboard(n, (n / 8).max(1), 10.0, 40.0),
        DemoImage::TwoBump => synth::two_bump(n, 30.0),
        DemoImage::RandomSmooth => synth::random_smooth(n, 60.0, args.seed),
        DemoImage::Cartoon => synth::cartoon(n),
    };
    let grid = if args.no_round { grid } else { synth::rounded(&grid) };
    save_image(&args.output, &grid, 255)?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<lls::Error>())
        .map_or(1, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Contrast(a) => contrast(a),
        Command::Demo(a) => demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
