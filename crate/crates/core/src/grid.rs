//! Uniform node-centered grids, scalar fields and finite-difference stencils.
//!
//! Node `(j, i)` sits at `(x_min + j*dx, y_min + i*dy)`; `j` runs along x and
//! `i` along y. Samples are stored row-major, `values[i * nx + j]`.
//!
//! Homogeneous Neumann boundaries are realized by mirror ghosts: index `-1`
//! reads node `0`, index `-2` reads node `1`, and symmetrically on the far
//! side. Every stencil in the crate reaches at most two nodes past the edge.

use crate::error::{Error, Result};

/// Smallest node count per axis; the widest stencil spans five nodes.
pub const MIN_NODES: usize = 5;

/// Ghost layer depth needed by the widest stencil.
pub const GHOST_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(Error::InvalidGrid("domain bounds must be finite".into()));
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(Error::InvalidGrid(format!(
                "degenerate domain [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "{nx}x{ny} nodes is below the minimum stencil width {MIN_NODES}"
            )));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
            dx: (x_max - x_min) / (nx - 1) as f64,
            dy: (y_max - y_min) / (ny - 1) as f64,
        })
    }

    /// Square domain `[-half, half]^2` with `n` nodes per axis.
    pub fn centered_square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, i: usize) -> f64 {
        self.y_min + i as f64 * self.dy
    }

    #[inline]
    pub fn index(&self, j: usize, i: usize) -> usize {
        i * self.nx + j
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }
}

pub fn make_grid(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<GridSpec> {
    GridSpec::new(x_min, x_max, y_min, y_max, nx, ny)
}

/// Mirror an out-of-range index back into `0..n` (half-sample symmetric).
#[inline]
pub fn mirror_index(k: isize, n: usize) -> usize {
    let n = n as isize;
    let m = if k < 0 {
        -k - 1
    } else if k >= n {
        2 * n - 1 - k
    } else {
        k
    };
    debug_assert!((0..n).contains(&m), "index {k} too far outside 0..{n}");
    m as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(ScalarField2D { grid, values })
    }

    /// Internal constructor for values produced by the crate's own kernels.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        ScalarField2D { grid, values }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self::from_raw(grid, vec![value; grid.len()])
    }

    /// Sample `f(x, y)` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.ny {
            let y = grid.y(i);
            for j in 0..grid.nx {
                values.push(f(grid.x(j), y));
            }
        }
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[self.grid.index(j, i)]
    }

    /// Read with mirror ghosts for out-of-range indices.
    #[inline]
    pub fn get_mirrored(&self, j: isize, i: isize) -> f64 {
        let j = mirror_index(j, self.grid.nx);
        let i = mirror_index(i, self.grid.ny);
        self.values[self.grid.index(j, i)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn same_grid(&self, other: &ScalarField2D) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// One-sided, centered, second and mixed differences at a node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiffStencil {
    pub d_minus_x: f64,
    pub d_plus_x: f64,
    pub d_central_x: f64,
    pub d_minus_y: f64,
    pub d_plus_y: f64,
    pub d_central_y: f64,
    pub d2_x: f64,
    pub d2_y: f64,
    pub d2_xy: f64,
}

impl DiffStencil {
    /// Build from the 3x3 neighbourhood `n[a][b] = u(j + a - 1, i + b - 1)`.
    #[inline]
    fn from_neighbourhood(n: &[[f64; 3]; 3], dx: f64, dy: f64) -> Self {
        let c = n[1][1];
        let d_minus_x = (c - n[0][1]) / dx;
        let d_plus_x = (n[2][1] - c) / dx;
        let d_minus_y = (c - n[1][0]) / dy;
        let d_plus_y = (n[1][2] - c) / dy;
        DiffStencil {
            d_minus_x,
            d_plus_x,
            d_central_x: (n[2][1] - n[0][1]) / (2.0 * dx),
            d_minus_y,
            d_plus_y,
            d_central_y: (n[1][2] - n[1][0]) / (2.0 * dy),
            d2_x: (n[2][1] - 2.0 * c + n[0][1]) / (dx * dx),
            d2_y: (n[1][2] - 2.0 * c + n[1][0]) / (dy * dy),
            d2_xy: (n[2][2] - n[0][2] - n[2][0] + n[0][0]) / (4.0 * dx * dy),
        }
    }

    #[inline]
    pub fn gradient_norm(&self) -> f64 {
        self.d_central_x.hypot(self.d_central_y)
    }
}

pub fn stencil_at(field: &ScalarField2D, j: usize, i: usize) -> DiffStencil {
    let (j, i) = (j as isize, i as isize);
    let mut n = [[0.0; 3]; 3];
    for (a, row) in n.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = field.get_mirrored(j + a as isize - 1, i + b as isize - 1);
        }
    }
    DiffStencil::from_neighbourhood(&n, field.grid.dx, field.grid.dy)
}

/// A field copy surrounded by a mirror ghost layer of depth [`GHOST_DEPTH`].
///
/// Kernels read through this instead of [`ScalarField2D::get_mirrored`] so the
/// inner loops stay branch-free.
#[derive(Debug, Clone)]
pub struct PaddedField {
    grid: GridSpec,
    stride: usize,
    data: Vec<f64>,
}

pub fn apply_neumann_bc(field: &ScalarField2D) -> PaddedField {
    let g = field.grid;
    let stride = g.nx + 2 * GHOST_DEPTH;
    let rows = g.ny + 2 * GHOST_DEPTH;
    let mut data = vec![0.0; stride * rows];
    let depth = GHOST_DEPTH as isize;
    for r in 0..rows {
        let i = mirror_index(r as isize - depth, g.ny);
        let src = &field.values[i * g.nx..(i + 1) * g.nx];
        let dst = &mut data[r * stride..(r + 1) * stride];
        for (c, slot) in dst.iter_mut().enumerate() {
            *slot = src[mirror_index(c as isize - depth, g.nx)];
        }
    }
    PaddedField { grid: g, stride, data }
}

impl PaddedField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Value at node `(j, i)`; valid for `-2 <= j <= nx + 1`, same for `i`.
    #[inline]
    pub fn at(&self, j: isize, i: isize) -> f64 {
        let d = GHOST_DEPTH as isize;
        self.data[((i + d) as usize) * self.stride + (j + d) as usize]
    }

    #[inline]
    pub fn stencil(&self, j: usize, i: usize) -> DiffStencil {
        let base = (i + GHOST_DEPTH) * self.stride + j + GHOST_DEPTH;
        let s = self.stride;
        let d = &self.data;
        let n = [
            [d[base - s - 1], d[base - 1], d[base + s - 1]],
            [d[base - s], d[base], d[base + s]],
            [d[base - s + 1], d[base + 1], d[base + s + 1]],
        ];
        DiffStencil::from_neighbourhood(&n, self.grid.dx, self.grid.dy)
    }

    /// Centered first differences only.
    #[inline]
    pub fn central_gradient(&self, j: usize, i: usize) -> (f64, f64) {
        let base = (i + GHOST_DEPTH) * self.stride + j + GHOST_DEPTH;
        let d = &self.data;
        (
            (d[base + 1] - d[base - 1]) / (2.0 * self.grid.dx),
            (d[base + self.stride] - d[base - self.stride]) / (2.0 * self.grid.dy),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square(n: usize) -> GridSpec {
        GridSpec::centered_square(2.0, n).unwrap()
    }

    #[test]
    fn spacing_from_node_counts() {
        let g = make_grid(-2.0, 2.0, -2.0, 2.0, 102, 102).unwrap();
        assert_abs_diff_eq!(g.dx, 4.0 / 101.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.dy, 4.0 / 101.0, epsilon = 1e-15);

        let g = make_grid(0.0, 1.0, 0.0, 2.0, 11, 21).unwrap();
        assert_abs_diff_eq!(g.dx, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(g.dy, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(g.x(10), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.y(20), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(0.0, 1.0, 0.0, 1.0, 2, 2).is_err());
        assert!(make_grid(0.0, 1.0, 0.0, 1.0, 4, 10).is_err());
        assert!(make_grid(1.0, 1.0, 0.0, 1.0, 10, 10).is_err());
        assert!(make_grid(0.0, 1.0, 2.0, 1.0, 10, 10).is_err());
        assert!(make_grid(0.0, f64::NAN, 0.0, 1.0, 10, 10).is_err());
    }

    #[test]
    fn field_construction_checks() {
        let g = square(5);
        assert!(matches!(
            ScalarField2D::new(g, vec![0.0; 24]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut v = vec![0.0; 25];
        v[7] = f64::NAN;
        assert!(matches!(ScalarField2D::new(g, v), Err(Error::NonFinite { index: 7 })));
    }

    #[test]
    fn mirror_rule() {
        assert_eq!(mirror_index(-1, 5), 0);
        assert_eq!(mirror_index(-2, 5), 1);
        assert_eq!(mirror_index(5, 5), 4);
        assert_eq!(mirror_index(6, 5), 3);
        assert_eq!(mirror_index(3, 5), 3);
    }

    #[test]
    fn affine_field_differences() {
        let g = square(21);
        let u = ScalarField2D::from_fn(g, |x, _| x);
        let s = stencil_at(&u, 10, 7);
        assert_abs_diff_eq!(s.d_plus_x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.d_minus_x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.d_central_x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.d2_x, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.d2_y, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.d2_xy, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn bilinear_mixed_difference_is_exact() {
        let g = square(21);
        let u = ScalarField2D::from_fn(g, |x, y| 0.3 - 2.0 * x + 0.5 * y + x * y);
        for &(j, i) in &[(5, 5), (10, 3), (17, 12)] {
            let s = stencil_at(&u, j, i);
            assert_abs_diff_eq!(s.d2_xy, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn quadratic_second_difference_is_exact() {
        let g = square(21);
        let u = ScalarField2D::from_fn(g, |x, _| x * x);
        let s = stencil_at(&u, 9, 9);
        assert_abs_diff_eq!(s.d2_x, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.d2_xy, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn mirrored_boundary() {
        let g = square(9);
        let u = ScalarField2D::from_fn(g, |x, _| x);
        let s = stencil_at(&u, 0, 4);
        assert_eq!(s.d_minus_x, 0.0);
        let s = stencil_at(&u, 8, 4);
        assert_eq!(s.d_plus_x, 0.0);

        let c = ScalarField2D::constant(g, 3.5);
        for i in 0..9 {
            for j in 0..9 {
                assert_eq!(stencil_at(&c, j, i), DiffStencil::default());
            }
        }
    }

    #[test]
    fn padded_field_agrees_with_mirrored_reads() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 2.0, 7, 6).unwrap();
        let u = ScalarField2D::from_fn(g, |x, y| (3.0 * x).sin() + y * y * x);
        let p = apply_neumann_bc(&u);
        for i in -2..8isize {
            for j in -2..9isize {
                assert_eq!(p.at(j, i), u.get_mirrored(j, i));
            }
        }
        for i in 0..6 {
            for j in 0..7 {
                assert_eq!(p.stencil(j, i), stencil_at(&u, j, i));
            }
        }
    }
}
