//! End-to-end segmentation loop: initial datum, velocity extension, scheme
//! update, front tracking and stopping, pixel errors.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField2D};
use crate::image::{normalize, IntensityImage};
use crate::schemes::{self, SchemeParams};
use crate::velocity::{classical_velocity, extend_velocity, ClassicalVelocity, DMap, Selection, VelocityModel};

pub const DEFAULT_N_MAX: usize = 2000;
pub const DEFAULT_RADIUS: f64 = 0.5;
pub const DEFAULT_PYRAMID_SLOPE: f64 = 2.0;
pub const DEFAULT_PYRAMID_CAP: f64 = -0.2;
/// Default distance, in grid cells, between the outer frame datum and the grid edge.
pub const DEFAULT_FRAME_INSET: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDatumKind {
    /// `min((x-cx)^2 + (y-cy)^2 - r^2, cap)`.
    Paraboloid { cx: f64, cy: f64, radius: f64, cap: f64 },
    /// Tent of the given slope, zero on the frame and cut at `cap` inside.
    ///
    /// The frame sits `inset` cells inside the grid edge. With mirror
    /// boundaries a front lying on the edge itself has no sign change on the
    /// grid and cannot move.
    TruncatedPyramid { slope: f64, cap: f64, inset: usize },
    SignedDistanceCircle { cx: f64, cy: f64, radius: f64 },
    /// Signed distance to the frame `inset` cells inside the grid edge, negative inside.
    SignedDistanceFrame { inset: usize },
}

impl InitialDatumKind {
    pub fn paraboloid(cx: f64, cy: f64, radius: f64) -> Self {
        InitialDatumKind::Paraboloid {
            cx,
            cy,
            radius,
            cap: 0.5 * radius * radius,
        }
    }

    pub fn pyramid() -> Self {
        InitialDatumKind::TruncatedPyramid {
            slope: DEFAULT_PYRAMID_SLOPE,
            cap: DEFAULT_PYRAMID_CAP,
            inset: DEFAULT_FRAME_INSET,
        }
    }

    pub fn frame() -> Self {
        InitialDatumKind::SignedDistanceFrame {
            inset: DEFAULT_FRAME_INSET,
        }
    }
}

/// `(a_x, b_x, a_y, b_y)` of a frame `inset` cells inside the grid edge.
fn frame_box(grid: &GridSpec, inset: usize) -> Result<(f64, f64, f64, f64)> {
    if 2 * inset + 2 > grid.nx.min(grid.ny) {
        return Err(Error::InvalidParameter(format!(
            "frame inset {inset} leaves no interior on a {}x{} grid",
            grid.nx, grid.ny
        )));
    }
    Ok((grid.x(inset), grid.x(grid.nx - 1 - inset), grid.y(inset), grid.y(grid.ny - 1 - inset)))
}

/// Initial level-set field (negative inside the initial front) and its level-distance map.
pub fn build_initial_datum(kind: InitialDatumKind, grid: &GridSpec) -> Result<(ScalarField2D, DMap)> {
    match kind {
        InitialDatumKind::Paraboloid { cx, cy, radius, cap } => {
            if !(radius > 0.0) {
                return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
            }
            if !(cap > 0.0) {
                return Err(Error::InvalidParameter(format!("paraboloid cap {cap} must be positive")));
            }
            let r2 = radius * radius;
            let u = ScalarField2D::from_fn(*grid, |x, y| ((x - cx).powi(2) + (y - cy).powi(2) - r2).min(cap));
            Ok((u, DMap::Paraboloid { radius, cap }))
        }
        InitialDatumKind::TruncatedPyramid { slope, cap, inset } => {
            if !(slope > 0.0) {
                return Err(Error::InvalidParameter(format!("slope {slope} must be positive")));
            }
            if !(cap < 0.0) {
                return Err(Error::InvalidParameter(format!("pyramid cap {cap} must be negative")));
            }
            let (ax, bx, ay, by) = frame_box(grid, inset)?;
            // Each face vanishes on one side of the frame and falls off
            // inward; the nearest face wins, then the tent is cut at `cap`.
            let u = ScalarField2D::from_fn(*grid, |x, y| {
                (slope * (x - bx))
                    .max(slope * (ax - x))
                    .max(slope * (y - by))
                    .max(slope * (ay - y))
                    .max(cap)
            });
            Ok((u, DMap::Pyramid { slope, cap }))
        }
        InitialDatumKind::SignedDistanceCircle { cx, cy, radius } => {
            if !(radius > 0.0) {
                return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
            }
            let u = ScalarField2D::from_fn(*grid, |x, y| (x - cx).hypot(y - cy) - radius);
            Ok((u, DMap::Identity))
        }
        InitialDatumKind::SignedDistanceFrame { inset } => {
            let (ax, bx, ay, by) = frame_box(grid, inset)?;
            // Outside the frame only the ring of `inset` cells remains, where
            // the largest face excess is the distance to the frame.
            let u = ScalarField2D::from_fn(*grid, |x, y| {
                let inner = (x - ax).min(bx - x).min(y - ay).min(by - y);
                if inner >= 0.0 {
                    -inner
                } else {
                    (ax - x).max(x - bx).max(0.0).hypot((ay - y).max(y - by).max(0.0))
                }
            });
            Ok((u, DMap::Identity))
        }
    }
}

/// `dt = lambda * min(dx, dy)`; velocities are bounded by 1.
pub fn cfl_timestep(grid: &GridSpec, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return Err(Error::InvalidParameter(format!("CFL number {lambda} outside (0, 1/2]")));
    }
    Ok(lambda * grid.dx.min(grid.dy))
}

/// What the front matrix stores at marked nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrontEncoding {
    /// The field value at marked nodes on the inner side (`u <= 0`), so a
    /// front that keeps moving keeps changing the matrix.
    #[default]
    InnerValues,
    /// The field value at every marked node.
    Values,
    /// Plain occupancy: 1 at marked nodes.
    Binary,
}

/// Nodes next to a sign change of `u`, where "sign" splits `u <= 0` from `u > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontMask {
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<bool>,
    /// Stored front matrix: the encoded value at marked nodes, 0 elsewhere.
    pub values: Vec<f64>,
}

impl FrontMask {
    #[inline]
    pub fn get(&self, j: usize, i: usize) -> bool {
        self.cells[i * self.nx + j]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }
}

/// Binary front mask.
pub fn track_front(u: &ScalarField2D) -> FrontMask {
    track_front_encoded(u, FrontEncoding::Binary)
}

pub fn track_front_encoded(u: &ScalarField2D, encoding: FrontEncoding) -> FrontMask {
    let g = u.grid();
    let (nx, ny) = (g.nx, g.ny);
    let inside: Vec<bool> = u.values().iter().map(|&v| v <= 0.0).collect();
    let mut cells = vec![false; nx * ny];
    for i in 0..ny {
        for j in 0..nx {
            let k = i * nx + j;
            let s = inside[k];
            cells[k] = (j > 0 && inside[k - 1] != s)
                || (j + 1 < nx && inside[k + 1] != s)
                || (i > 0 && inside[k - nx] != s)
                || (i + 1 < ny && inside[k + nx] != s);
        }
    }
    let values = cells
        .iter()
        .zip(u.values())
        .map(|(&marked, &v)| match (marked, encoding) {
            (false, _) => 0.0,
            (true, FrontEncoding::Binary) => 1.0,
            (true, FrontEncoding::Values) => v,
            (true, FrontEncoding::InnerValues) => v.min(0.0),
        })
        .collect();
    FrontMask { nx, ny, cells, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopNorm {
    #[default]
    Inf,
    L1,
}

pub fn stopping_error(f_now: &FrontMask, f_prev: &FrontMask, norm: StopNorm, grid: &GridSpec) -> Result<f64> {
    if f_now.nx != f_prev.nx || f_now.ny != f_prev.ny || f_now.nx != grid.nx || f_now.ny != grid.ny {
        return Err(Error::GridMismatch);
    }
    let diffs = f_now.values.iter().zip(&f_prev.values).map(|(a, b)| (a - b).abs());
    Ok(match norm {
        StopNorm::Inf => diffs.fold(0.0, f64::max),
        StopNorm::L1 => grid.cell_area() * diffs.sum::<f64>(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Case {
    #[default]
    Expand,
    /// The front starts outside the object and moves inward.
    Shrink,
}

/// Which side of the intensity threshold is the object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    /// Object pixels satisfy `I <= threshold`.
    #[default]
    Dark,
    /// Object pixels satisfy `I >= threshold`.
    Bright,
}

/// Binary object mask, row-major.
pub fn exact_mask_from_threshold(image_field: &ScalarField2D, threshold: f64, polarity: Polarity) -> Vec<bool> {
    image_field
        .values()
        .iter()
        .map(|&v| match polarity {
            Polarity::Dark => v <= threshold,
            Polarity::Bright => v >= threshold,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelErrors {
    pub exact_pixels: usize,
    pub approx_pixels: usize,
    pub relative: f64,
    pub l1: f64,
}

/// Compare the object size of `u <= 0` with the exact mask.
pub fn pixel_errors(u_final: &ScalarField2D, exact_mask: &[bool], grid: &GridSpec) -> Result<PixelErrors> {
    if exact_mask.len() != grid.len() || u_final.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let exact = exact_mask.iter().filter(|&&m| m).count();
    if exact == 0 {
        return Err(Error::DegenerateInput("exact object mask is empty".into()));
    }
    let approx = u_final.values().iter().filter(|&&v| v <= 0.0).count();
    let diff = exact.abs_diff(approx) as f64;
    Ok(PixelErrors {
        exact_pixels: exact,
        approx_pixels: approx,
        relative: diff / exact as f64,
        l1: diff * grid.cell_area(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub velocity: VelocityModel,
    pub scheme: SchemeParams,
    pub datum: InitialDatumKind,
    pub k_reg: usize,
    pub tol: f64,
    pub norm: StopNorm,
    pub front: FrontEncoding,
    pub n_max: usize,
    pub case: Case,
    /// Normalized intensity threshold for the exact object mask.
    pub threshold: f64,
    pub polarity: Polarity,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.velocity.validate()?;
        self.scheme.validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol = {} must be positive", self.tol)));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidParameter("N_max must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub iterations: usize,
    pub converged: bool,
    pub dt: f64,
    /// Final level-set field, negative inside the segmented region.
    pub final_field: ScalarField2D,
    pub final_front: FrontMask,
    /// Stopping error after each iteration.
    pub errors: Vec<f64>,
    /// `None` when the exact mask is empty (no object found by thresholding).
    pub pixel_errors: Option<PixelErrors>,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn segmented_mask(&self) -> Vec<bool> {
        self.final_field.values().iter().map(|&v| v <= 0.0).collect()
    }
}

/// Run the segmentation loop on an image sampled on `grid`.
pub fn run_segmentation(config: &RunConfig, image: &IntensityImage, grid: &GridSpec) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let intensity = normalize(image, grid)?;
    let exact = exact_mask_from_threshold(&intensity, config.threshold, config.polarity);
    let base_velocity = classical_velocity(&intensity, config.velocity.base(), config.k_reg)?;
    let exact = exact.iter().any(|&m| m).then_some(exact);
    let mut report = run_with_velocity(config, &base_velocity, exact.as_deref())?;
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Run the loop with a precomputed base velocity on its grid.
///
/// The shrinking case evolves the negated field with the same PDE, so the
/// front always moves outward from the region where the evolved field is
/// negative; results are reported in the original orientation.
pub fn run_with_velocity(config: &RunConfig, base_velocity: &ScalarField2D, exact_mask: Option<&[bool]>) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let grid = base_velocity.grid();
    let (u0, dmap) = build_initial_datum(config.datum, grid)?;
    let (mut w, dmap) = match config.case {
        Case::Expand => (u0, dmap),
        Case::Shrink => (u0.map(|v| -v), dmap.reflected()),
    };
    let orient = |field: &ScalarField2D| match config.case {
        Case::Expand => track_front_encoded(field, config.front),
        Case::Shrink => track_front_encoded(&field.map(|v| -v), config.front),
    };
    let dt = cfl_timestep(grid, config.scheme.lambda)?;

    let mut prev_front = orient(&w);
    let mut error = 1.0;
    let mut errors = Vec::new();
    let mut n = 0;
    while error >= config.tol && n < config.n_max {
        w = match config.velocity {
            VelocityModel::Modified { selection, .. } => {
                let c_tilde = extend_velocity(base_velocity, &w, &dmap, selection)?;
                schemes::step(&w, &c_tilde, dt, &config.scheme)?
            }
            VelocityModel::Classical(_) => schemes::step(&w, base_velocity, dt, &config.scheme)?,
        };
        n += 1;
        let front = orient(&w);
        error = stopping_error(&front, &prev_front, config.norm, grid)?;
        errors.push(error);
        prev_front = front;
    }

    let final_field = match config.case {
        Case::Expand => w,
        Case::Shrink => w.map(|v| -v),
    };
    let pixel_errors = exact_mask.map(|m| pixel_errors(&final_field, m, grid)).transpose()?;
    Ok(RunReport {
        iterations: n,
        converged: error < config.tol,
        dt,
        final_field,
        final_front: prev_front,
        errors,
        pixel_errors,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            velocity: VelocityModel::Modified {
                base: ClassicalVelocity::C1 { mu: 2.0 },
                selection: Selection::default(),
            },
            scheme: SchemeParams::default(),
            datum: InitialDatumKind::paraboloid(0.0, 0.0, DEFAULT_RADIUS),
            k_reg: 0,
            tol: 5e-4,
            norm: StopNorm::Inf,
            front: FrontEncoding::InnerValues,
            n_max: DEFAULT_N_MAX,
            case: Case::Expand,
            threshold: 0.5,
            polarity: Polarity::Dark,
        }
    }
}
