//! Python bindings for `afseg`.
//!
//! Fields cross the boundary as lists of rows, `rows[i][j]` being the node
//! at `(x_j, y_i)`.

use std::path::PathBuf;

use afseg::cli::{self, CliConfig};
use afseg::smoothness::DEFAULT_M;
use afseg::{GridSpec, IntensityImage, RunReport, ScalarField2D, SchemeParams};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows<T: Copy>(values: &[T], nx: usize) -> Vec<Vec<T>> {
    values.chunks(nx).map(<[T]>::to_vec).collect()
}

type Bounds = (f64, f64, f64, f64);

fn field_from_rows(rows: Vec<Vec<f64>>, bounds: Bounds) -> PyResult<ScalarField2D> {
    let ny = rows.len();
    let nx = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nx) {
        return Err(value_err("rows must all have the same length"));
    }
    let (x0, x1, y0, y1) = bounds;
    let grid = GridSpec::new(x0, x1, y0, y1, nx, ny).map_err(value_err)?;
    ScalarField2D::new(grid, rows.concat()).map_err(value_err)
}

/// Result of one segmentation run.
#[pyclass(module = "afseg_py", frozen)]
struct Report {
    inner: RunReport,
    image: IntensityImage,
}

#[pymethods]
impl Report {
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn errors(&self) -> Vec<f64> {
        self.inner.errors.clone()
    }

    /// `(P_err_rel, P_err_1)`, or None when thresholding found no object.
    #[getter]
    fn pixel_errors(&self) -> Option<(f64, f64)> {
        self.inner.pixel_errors.map(|p| (p.relative, p.l1))
    }

    #[getter]
    fn field(&self) -> Vec<Vec<f64>> {
        rows(self.inner.final_field.values(), self.inner.final_field.grid().nx)
    }

    #[getter]
    fn mask(&self) -> Vec<Vec<bool>> {
        rows(&self.inner.segmented_mask(), self.inner.final_field.grid().nx)
    }

    #[getter]
    fn front(&self) -> Vec<Vec<bool>> {
        rows(&self.inner.final_front.cells, self.inner.final_front.nx)
    }

    #[getter]
    fn wall_seconds(&self) -> f64 {
        self.inner.wall_seconds
    }

    /// Write report.txt, errors.csv, mask.pgm and front.pgm into `out_dir`.
    fn write(&self, out_dir: PathBuf) -> PyResult<()> {
        cli::emit_report(&self.inner, &self.image, &out_dir).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(iterations={}, converged={}, dt={})",
            self.inner.iterations, self.inner.converged, self.inner.dt
        )
    }
}

/// Run a segmentation. `args` takes the same flags as the `afseg` binary.
#[pyfunction]
fn segment(py: Python<'_>, args: Vec<String>) -> PyResult<Report> {
    let argv = std::iter::once("afseg".to_string()).chain(args);
    let config: CliConfig = cli::parse_args(argv).map_err(|e| value_err(e.render()))?;
    let (image, grid) = cli::load_input(&config).map_err(value_err)?;
    let inner = py
        .detach(|| afseg::run_segmentation(&config.run, &image, &grid))
        .map_err(value_err)?;
    Ok(Report { inner, image })
}

/// One time step of `u_t + c|grad u| = 0` on the rectangle `bounds`.
#[pyfunction]
#[pyo3(signature = (u, c, scheme = "af-lw", lam = 0.5, bounds = (-2.0, 2.0, -2.0, 2.0)))]
fn step(u: Vec<Vec<f64>>, c: Vec<Vec<f64>>, scheme: &str, lam: f64, bounds: Bounds) -> PyResult<Vec<Vec<f64>>> {
    let mut params = match scheme {
        "af-lw" => SchemeParams::default(),
        "monotone" => SchemeParams::monotone(),
        other => return Err(value_err(format!("unknown scheme {other:?}"))),
    };
    params.lambda = lam;
    let u = field_from_rows(u, bounds)?;
    let c = field_from_rows(c, bounds)?;
    let dt = afseg::cfl_timestep(u.grid(), lam).map_err(value_err)?;
    let next = afseg::step(&u, &c, dt, &params).map_err(value_err)?;
    Ok(rows(next.values(), next.grid().nx))
}

/// Per-node regularity flags from the smoothness indicators.
#[pyfunction]
#[pyo3(signature = (u, m = DEFAULT_M, bounds = (-2.0, 2.0, -2.0, 2.0)))]
fn regularity(u: Vec<Vec<f64>>, m: f64, bounds: Bounds) -> PyResult<Vec<Vec<bool>>> {
    let u = field_from_rows(u, bounds)?;
    let phi = afseg::indicator_field(&u, m);
    Ok(rows(&phi.flags, phi.nx))
}

#[pymodule]
fn afseg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(regularity, m)?)?;
    Ok(())
}
