//! WENO-style regularity detection.
//!
//! Around every node the 3x3 cell is split into four quadrants. Each quadrant
//! pairs an inner stencil `S0` (centered on the node) with an outer stencil
//! `S1` (anchored at the node and reaching two nodes into the quadrant). The
//! smoothness coefficients of the pair are turned into a weight favouring
//! the inner stencil; the node is flagged regular when the smallest
//! quadrant weight, after the M-WENO mapping, reaches the threshold `M`.

use crate::grid::{apply_neumann_bc, GridSpec, PaddedField, ScalarField2D};

pub const DEFAULT_M: f64 = 0.1;

/// Ordered 3x3 stencil, given as node offsets from the center node. The first
/// entry of each axis list is the origin of the undivided differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderedStencil {
    pub x: [isize; 3],
    pub y: [isize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    MinusMinus,
    PlusMinus,
    PlusPlus,
    MinusPlus,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::MinusMinus,
        Quadrant::PlusMinus,
        Quadrant::PlusPlus,
        Quadrant::MinusPlus,
    ];

    /// `(S0, S1)` for this quadrant.
    pub fn stencils(self) -> (OrderedStencil, OrderedStencil) {
        const UP: [isize; 3] = [-1, 0, 1];
        const DOWN: [isize; 3] = [1, 0, -1];
        const FAR_NEG: [isize; 3] = [0, -1, -2];
        const FAR_POS: [isize; 3] = [0, 1, 2];
        let st = |x, y| OrderedStencil { x, y };
        match self {
            Quadrant::MinusMinus => (st(UP, UP), st(FAR_NEG, FAR_NEG)),
            Quadrant::PlusMinus => (st(DOWN, UP), st(FAR_POS, FAR_NEG)),
            Quadrant::PlusPlus => (st(DOWN, DOWN), st(FAR_POS, FAR_POS)),
            Quadrant::MinusPlus => (st(UP, DOWN), st(FAR_NEG, FAR_POS)),
        }
    }
}

/// Undivided differences `u[t,s]` for `t, s` in `1..=3`, indexed `[t-1][s-1]`.
///
/// `u[t,s]` is the order-`(t-1)` forward difference in x taken over the first
/// `t` stencil points, composed with the order-`(s-1)` difference in y.
pub type UndividedTable = [[f64; 3]; 3];

#[inline]
fn gather(u: &PaddedField, j: usize, i: usize, stencil: &OrderedStencil) -> [[f64; 3]; 3] {
    let (j, i) = (j as isize, i as isize);
    let mut v = [[0.0; 3]; 3];
    for (a, &ox) in stencil.x.iter().enumerate() {
        for (b, &oy) in stencil.y.iter().enumerate() {
            v[a][b] = u.at(j + ox, i + oy);
        }
    }
    v
}

/// Same as [`gather`] from a prefetched 5x5 neighbourhood `w[dx + 2][dy + 2]`.
#[inline]
fn gather_local(w: &[[f64; 5]; 5], stencil: &OrderedStencil) -> [[f64; 3]; 3] {
    let mut v = [[0.0; 3]; 3];
    for (a, &ox) in stencil.x.iter().enumerate() {
        for (b, &oy) in stencil.y.iter().enumerate() {
            v[a][b] = w[(ox + 2) as usize][(oy + 2) as usize];
        }
    }
    v
}

#[inline]
fn table_from_values(v: &[[f64; 3]; 3]) -> UndividedTable {
    // Difference along y first, then along x.
    let mut along_y = [[0.0; 3]; 3];
    for a in 0..3 {
        along_y[a] = [v[a][0], v[a][1] - v[a][0], v[a][0] - 2.0 * v[a][1] + v[a][2]];
    }
    let mut table = [[0.0; 3]; 3];
    for s in 0..3 {
        let (r0, r1, r2) = (along_y[0][s], along_y[1][s], along_y[2][s]);
        table[0][s] = r0;
        table[1][s] = r1 - r0;
        table[2][s] = r0 - 2.0 * r1 + r2;
    }
    table
}

pub fn undivided_table(u: &ScalarField2D, j: usize, i: usize, stencil: &OrderedStencil) -> UndividedTable {
    let padded = apply_neumann_bc(u);
    table_from_values(&gather(&padded, j, i, stencil))
}

/// Smoothness coefficient from an undivided-difference table; clamped at 0.
#[inline]
pub fn beta_from_table(t: &UndividedTable, dx: f64, dy: f64) -> f64 {
    let u31 = t[2][0];
    let u13 = t[0][2];
    let u22 = t[1][1];
    let u32 = t[2][1];
    let u23 = t[1][2];
    let u33 = t[2][2];
    let form = u31 * u31
        + u13 * u13
        + u22 * u22
        + 17.0 / 12.0 * (u32 * u32 + u23 * u23)
        + 317.0 / 720.0 * u33 * u33
        + u31 * u32
        + u13 * u23
        - (u31 * u33 + u13 * u33) / 6.0
        - (u32 * u33 + u23 * u33) / 12.0;
    (form / (dx * dy)).max(0.0)
}

pub fn smoothness_beta(u: &ScalarField2D, j: usize, i: usize, stencil: &OrderedStencil) -> f64 {
    let g = u.grid();
    beta_from_table(&undivided_table(u, j, i, stencil), g.dx, g.dy)
}

/// Nonlinear weight of the inner stencil, `alpha0 / (alpha0 + alpha1)` with
/// `alpha_k = 1 / (beta_k + sigma_h)^2`.
#[inline]
pub fn quadrant_weight(beta0: f64, beta1: f64, sigma_h: f64) -> f64 {
    let s0 = (beta0 + sigma_h) * (beta0 + sigma_h);
    let s1 = (beta1 + sigma_h) * (beta1 + sigma_h);
    s1 / (s0 + s1)
}

/// M-WENO mapping `4w(3/4 - 3w/2 + w^2)`.
#[inline]
pub fn map_weno(omega: f64) -> f64 {
    4.0 * omega * (0.75 - 1.5 * omega + omega * omega)
}

pub fn sigma_h(grid: &GridSpec) -> f64 {
    grid.dx * grid.dx + grid.dy * grid.dy
}

/// Full indicator breakdown at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcellIndicators {
    /// Per quadrant in [`Quadrant::ALL`] order.
    pub beta0: [f64; 4],
    pub beta1: [f64; 4],
    pub omega: [f64; 4],
    pub omega_min: f64,
    pub omega_star: f64,
    pub phi: bool,
}

#[inline]
fn indicators_padded(u: &PaddedField, j: usize, i: usize, m: f64) -> SubcellIndicators {
    let g = u.grid();
    let sigma = sigma_h(g);
    let mut out = SubcellIndicators {
        beta0: [0.0; 4],
        beta1: [0.0; 4],
        omega: [0.0; 4],
        omega_min: 0.0,
        omega_star: 0.0,
        phi: false,
    };
    let mut w = [[0.0; 5]; 5];
    for (a, col) in w.iter_mut().enumerate() {
        for (b, v) in col.iter_mut().enumerate() {
            *v = u.at(j as isize + a as isize - 2, i as isize + b as isize - 2);
        }
    }
    for (k, q) in Quadrant::ALL.iter().enumerate() {
        let (s0, s1) = q.stencils();
        let b0 = beta_from_table(&table_from_values(&gather_local(&w, &s0)), g.dx, g.dy);
        let b1 = beta_from_table(&table_from_values(&gather_local(&w, &s1)), g.dx, g.dy);
        out.beta0[k] = b0;
        out.beta1[k] = b1;
        out.omega[k] = quadrant_weight(b0, b1, sigma);
    }
    out.omega_min = out.omega.iter().copied().fold(f64::INFINITY, f64::min);
    out.omega_star = map_weno(out.omega_min);
    out.phi = out.omega_star >= m;
    out
}

pub fn subcell_indicators(u: &ScalarField2D, j: usize, i: usize, m: f64) -> SubcellIndicators {
    indicators_padded(&apply_neumann_bc(u), j, i, m)
}

/// Binary regularity flag per node, row-major like the field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorField {
    pub nx: usize,
    pub ny: usize,
    pub flags: Vec<bool>,
}

impl IndicatorField {
    pub fn uniform(grid: &GridSpec, value: bool) -> Self {
        IndicatorField {
            nx: grid.nx,
            ny: grid.ny,
            flags: vec![value; grid.len()],
        }
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> bool {
        self.flags[i * self.nx + j]
    }

    pub fn count_regular(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

pub(crate) fn indicator_field_padded(u: &PaddedField, m: f64) -> IndicatorField {
    let g = *u.grid();
    let mut flags = Vec::with_capacity(g.len());
    for i in 0..g.ny {
        for j in 0..g.nx {
            flags.push(indicators_padded(u, j, i, m).phi);
        }
    }
    IndicatorField {
        nx: g.nx,
        ny: g.ny,
        flags,
    }
}

pub fn indicator_field(u: &ScalarField2D, m: f64) -> IndicatorField {
    indicator_field_padded(&apply_neumann_bc(u), m)
}
