//! Batch command-line front end: flag parsing, run orchestration and artifact output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::driver::{run_segmentation, Case, FrontEncoding, InitialDatumKind, Polarity, RunConfig, RunReport, StopNorm, DEFAULT_N_MAX};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::image::{render_synthetic, IntensityImage, ShapeSpec};
use crate::schemes::{SchemeKind, SchemeParams, DEFAULT_K, DEFAULT_LAMBDA};
use crate::smoothness::DEFAULT_M;
use crate::velocity::{ClassicalVelocity, Selection, VelocityModel};

pub const EXIT_CONVERGED: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;

/// Half-width of the default square domain `[-2, 2]^2`.
pub const DOMAIN_HALF_WIDTH: f64 = 2.0;
pub const DEFAULT_NODES: usize = 102;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SyntheticArg {
    Rhombus,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Monotone,
    AfLw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VelocityArg {
    C1,
    C2,
    ModifiedC1,
    ModifiedC2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatumArg {
    Paraboloid,
    DistanceCircle,
    Pyramid,
    DistanceFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Expand,
    Shrink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Inf,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrontArg {
    Inner,
    Values,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectionArg {
    Bilinear,
    MinAbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolarityArg {
    Dark,
    Bright,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "afseg", version, about = "Level-set image segmentation")]
#[command(group = clap::ArgGroup::new("source").required(true).args(["image", "synthetic"]))]
struct Args {
    /// Input PGM image (P2 or P5)
    #[arg(long, value_name = "PATH")]
    image: Option<PathBuf>,
    /// Render a synthetic test image on the grid instead of reading one
    #[arg(long, value_enum)]
    synthetic: Option<SyntheticArg>,
    /// Nodes per axis (synthetic default 102; must match the image size when given with --image)
    #[arg(long, value_name = "N")]
    nodes: Option<usize>,
    #[arg(long, value_enum, default_value = "af-lw")]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "modified-c1")]
    velocity: VelocityArg,
    /// Initial datum (default: paraboloid when expanding, pyramid when shrinking)
    #[arg(long, value_enum)]
    datum: Option<DatumArg>,
    #[arg(long = "case", value_enum, default_value = "expand")]
    case_: CaseArg,
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    /// Heat regularization steps applied to the image
    #[arg(long, default_value_t = 0)]
    kreg: usize,
    #[arg(long, default_value_t = 5e-4)]
    tol: f64,
    #[arg(long, value_enum, default_value = "inf")]
    norm: NormArg,
    /// What the front matrix stores at marked nodes
    #[arg(long, value_enum, default_value = "inner")]
    front: FrontArg,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    nmax: usize,
    /// CFL number
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    /// Switching-threshold factor
    #[arg(long = "K", default_value_t = DEFAULT_K)]
    k: f64,
    /// Smoothness-indicator threshold
    #[arg(long = "M", default_value_t = DEFAULT_M)]
    m: f64,
    /// Radius of the initial circle
    #[arg(long, default_value_t = crate::driver::DEFAULT_RADIUS)]
    radius: f64,
    #[arg(long, value_enum, default_value = "min-abs")]
    selection: SelectionArg,
    /// Normalized intensity threshold for the reference mask
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "dark")]
    polarity: PolarityArg,
    /// Output directory for mask.pgm, front.pgm, errors.csv and report.txt
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Centre of the initial circle
    #[arg(long, value_name = "X,Y", value_parser = parse_point)]
    seed_center: Option<(f64, f64)>,
}

fn parse_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(x)?, parse(y)?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Image(PathBuf),
    Synthetic(SyntheticArg),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub source: Source,
    pub nodes: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub run: RunConfig,
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let a = Args::try_parse_from(argv)?;
    let source = match (a.image, a.synthetic) {
        (Some(p), None) => Source::Image(p),
        (None, Some(s)) => Source::Synthetic(s),
        _ => unreachable!("clap enforces exactly one source"),
    };
    let base = match a.velocity {
        VelocityArg::C1 | VelocityArg::ModifiedC1 => ClassicalVelocity::C1 { mu: a.mu },
        VelocityArg::C2 | VelocityArg::ModifiedC2 => ClassicalVelocity::C2,
    };
    let selection = match a.selection {
        SelectionArg::Bilinear => Selection::Bilinear,
        SelectionArg::MinAbs => Selection::MinAbsNeighbor,
    };
    let velocity = match a.velocity {
        VelocityArg::C1 | VelocityArg::C2 => VelocityModel::Classical(base),
        VelocityArg::ModifiedC1 | VelocityArg::ModifiedC2 => VelocityModel::Modified { base, selection },
    };
    let case = match a.case_ {
        CaseArg::Expand => Case::Expand,
        CaseArg::Shrink => Case::Shrink,
    };
    let (cx, cy) = a.seed_center.unwrap_or((0.0, 0.0));
    let datum = match a.datum.unwrap_or(match case {
        Case::Expand => DatumArg::Paraboloid,
        Case::Shrink => DatumArg::Pyramid,
    }) {
        DatumArg::Paraboloid => InitialDatumKind::paraboloid(cx, cy, a.radius),
        DatumArg::DistanceCircle => InitialDatumKind::SignedDistanceCircle { cx, cy, radius: a.radius },
        DatumArg::Pyramid => InitialDatumKind::pyramid(),
        DatumArg::DistanceFrame => InitialDatumKind::frame(),
    };
    let scheme = SchemeParams {
        scheme: match a.scheme {
            SchemeArg::Monotone => SchemeKind::Monotone,
            SchemeArg::AfLw => SchemeKind::AfLw,
        },
        lambda: a.lambda,
        k: a.k,
        m: a.m,
        ..SchemeParams::default()
    };
    let run = RunConfig {
        velocity,
        scheme,
        datum,
        k_reg: a.kreg,
        tol: a.tol,
        norm: match a.norm {
            NormArg::Inf => StopNorm::Inf,
            NormArg::L1 => StopNorm::L1,
        },
        front: match a.front {
            FrontArg::Inner => FrontEncoding::InnerValues,
            FrontArg::Values => FrontEncoding::Values,
            FrontArg::Binary => FrontEncoding::Binary,
        },
        n_max: a.nmax,
        case,
        threshold: a.threshold,
        polarity: match a.polarity {
            PolarityArg::Dark => Polarity::Dark,
            PolarityArg::Bright => Polarity::Bright,
        },
    };
    Ok(CliConfig {
        source,
        nodes: a.nodes,
        out_dir: a.out,
        run,
    })
}

/// Load or render the input image and the grid it lives on.
pub fn load_input(config: &CliConfig) -> Result<(IntensityImage, GridSpec)> {
    match &config.source {
        Source::Synthetic(kind) => {
            let n = config.nodes.unwrap_or(DEFAULT_NODES);
            let grid = GridSpec::centered_square(DOMAIN_HALF_WIDTH, n)?;
            let shape = match kind {
                SyntheticArg::Rhombus => ShapeSpec::benchmark_rhombus(),
                SyntheticArg::Circle => ShapeSpec::circle(0.0, 0.0, 1.0),
            };
            Ok((render_synthetic(&shape, &grid)?, grid))
        }
        Source::Image(path) => {
            let image = IntensityImage::read(path)?;
            if let Some(n) = config.nodes {
                if n != image.width || n != image.height {
                    return Err(Error::InvalidParameter(format!(
                        "--nodes {n} does not match the {}x{} image",
                        image.width, image.height
                    )));
                }
            }
            let h = DOMAIN_HALF_WIDTH;
            let grid = GridSpec::new(-h, h, -h, h, image.width, image.height)?;
            Ok((image, grid))
        }
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows `iter,E,P_err_rel,P_err_1,seconds`, starting with the initial `E = 1`.
///
/// `seconds` is the evolution time `n * dt`, so the file is reproducible.
pub fn errors_csv(report: &RunReport) -> String {
    let mut out = String::from("iter,E,P_err_rel,P_err_1,seconds\n");
    let rows = std::iter::once(1.0).chain(report.errors.iter().copied()).enumerate();
    let last = report.errors.len();
    for (n, e) in rows {
        let (rel, l1) = match (n == last, report.pixel_errors) {
            (true, Some(p)) => (fmt17(p.relative), fmt17(p.l1)),
            _ => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{n},{},{rel},{l1},{}", fmt17(e), fmt17(n as f64 * report.dt));
    }
    out
}

pub fn report_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "N_i={}", report.iterations);
    let _ = writeln!(out, "converged={}", report.converged);
    let _ = writeln!(out, "dt={}", fmt17(report.dt));
    if let Some(p) = report.pixel_errors {
        let _ = writeln!(out, "P_ex={}", p.exact_pixels);
        let _ = writeln!(out, "P_a={}", p.approx_pixels);
        let _ = writeln!(out, "P_err_rel={}", fmt17(p.relative));
        let _ = writeln!(out, "P_err_1={}", fmt17(p.l1));
    }
    let _ = writeln!(out, "wall_seconds={:.6}", report.wall_seconds);
    out
}

pub fn mask_image(report: &RunReport) -> IntensityImage {
    let g = report.final_field.grid();
    let samples = report.segmented_mask().into_iter().map(|m| if m { 255 } else { 0 }).collect();
    IntensityImage::new(g.nx, g.ny, 255, samples).expect("mask matches its grid")
}

pub fn front_overlay(report: &RunReport, image: &IntensityImage) -> IntensityImage {
    let mut overlay = image.clone();
    for (s, &f) in overlay.samples.iter_mut().zip(&report.final_front.cells) {
        if f {
            *s = image.max_value;
        }
    }
    overlay
}

/// Write `mask.pgm`, `front.pgm`, `errors.csv` and `report.txt` into `out_dir`.
pub fn emit_report(report: &RunReport, image: &IntensityImage, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    mask_image(report).write(out_dir.join("mask.pgm"))?;
    front_overlay(report, image).write(out_dir.join("front.pgm"))?;
    for (name, text) in [("errors.csv", errors_csv(report)), ("report.txt", report_text(report))] {
        let path = out_dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Parse, run and emit; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_CONVERGED };
            let _ = e.print();
            return code;
        }
    };
    match run(&config) {
        Ok(report) => {
            print!("{}", report_text(&report));
            if report.converged {
                EXIT_CONVERGED
            } else {
                EXIT_NOT_CONVERGED
            }
        }
        Err(e) => {
            eprintln!("afseg: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(config: &CliConfig) -> Result<RunReport> {
    let (image, grid) = load_input(config)?;
    let report = run_segmentation(&config.run, &image, &grid)?;
    if let Some(dir) = &config.out_dir {
        emit_report(&report, &image, dir)?;
    }
    Ok(report)
}
