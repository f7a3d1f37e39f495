//! Numerical hamiltonians and one-step update operators for
//! `u_t + c(x, y) |grad u| = 0`.
//!
//! The monotone scheme is local Lax-Friedrichs with `alpha = c` at the node
//! (`|H_p| <= c` for the isotropic hamiltonian). The high-order scheme is
//! Lax-Wendroff with centered differences. The adaptive filtered (AF)
//! scheme takes the Lax-Wendroff value where the regularity flag is set and
//! the two schemes agree to within `eps * dt`, and the monotone value
//! everywhere else.

use crate::error::{Error, Result};
use crate::grid::{apply_neumann_bc, DiffStencil, PaddedField, ScalarField2D};
use crate::smoothness::{indicator_field_padded, IndicatorField, DEFAULT_M};
use crate::velocity::GRADIENT_EPS;

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_K: f64 = 1.0;
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Monotone,
    AfLw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub scheme: SchemeKind,
    /// CFL number `dt / min(dx, dy)`.
    pub lambda: f64,
    /// Multiplier in the switching threshold; must exceed 1/2.
    pub k: f64,
    /// Regularity threshold on the mapped weight.
    pub m: f64,
    pub epsilon_floor: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            scheme: SchemeKind::AfLw,
            lambda: DEFAULT_LAMBDA,
            k: DEFAULT_K,
            m: DEFAULT_M,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
        }
    }
}

impl SchemeParams {
    pub fn monotone() -> Self {
        SchemeParams {
            scheme: SchemeKind::Monotone,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "CFL number {} outside (0, 1/2]",
                self.lambda
            )));
        }
        if !(self.k > 0.5 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!("K = {} must exceed 1/2", self.k)));
        }
        if !(self.m > 0.0 && self.m < 0.5) {
            return Err(Error::InvalidParameter(format!("M = {} outside (0, 1/2)", self.m)));
        }
        if !(self.epsilon_floor > 0.0 && self.epsilon_floor.is_finite()) {
            return Err(Error::InvalidParameter("epsilon floor must be positive".into()));
        }
        Ok(())
    }
}

/// Upwind hamiltonian for the unit-speed eikonal equation.
pub fn hm_eikonal(p_minus: f64, p_plus: f64, q_minus: f64, q_plus: f64) -> f64 {
    let a = p_minus.max(-p_plus).max(0.0);
    let b = q_minus.max(-q_plus).max(0.0);
    (a * a + b * b).sqrt()
}

/// Local Lax-Friedrichs hamiltonian for `H = c |(p, q)|` with explicit
/// one-sided arguments.
#[inline]
pub fn llf(c: f64, alpha_x: f64, alpha_y: f64, p_minus: f64, p_plus: f64, q_minus: f64, q_plus: f64) -> f64 {
    let p = 0.5 * (p_plus + p_minus);
    let q = 0.5 * (q_plus + q_minus);
    c * (p * p + q * q).sqrt() - 0.5 * alpha_x * (p_plus - p_minus) - 0.5 * alpha_y * (q_plus - q_minus)
}

#[inline]
pub fn hm_llf(c_node: f64, st: &DiffStencil, alpha_x: f64, alpha_y: f64) -> f64 {
    llf(c_node, alpha_x, alpha_y, st.d_minus_x, st.d_plus_x, st.d_minus_y, st.d_plus_y)
}

/// Terms of `H = c |grad u|` and its derivatives at a node, centered differences.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HamiltonianTerms {
    h: f64,
    h_p: f64,
    h_q: f64,
    /// `H_p (H_p u_xx + H_x) + H_q (H_q u_yy + H_y) + 2 H_p H_q u_xy`
    second_order: f64,
}

#[inline]
fn hamiltonian_terms(c: &PaddedField, st: &DiffStencil, j: usize, i: usize) -> HamiltonianTerms {
    let norm = st.gradient_norm();
    if norm < GRADIENT_EPS {
        return HamiltonianTerms {
            h: 0.0,
            h_p: 0.0,
            h_q: 0.0,
            second_order: 0.0,
        };
    }
    let g = c.grid();
    let (j, i) = (j as isize, i as isize);
    let c0 = c.at(j, i);
    let h_p = c0 * st.d_central_x / norm;
    let h_q = c0 * st.d_central_y / norm;
    let h_x = (c.at(j + 1, i) - c.at(j - 1, i)) / (2.0 * g.dx) * norm;
    let h_y = (c.at(j, i + 1) - c.at(j, i - 1)) / (2.0 * g.dy) * norm;
    HamiltonianTerms {
        h: c0 * norm,
        h_p,
        h_q,
        second_order: h_p * (h_p * st.d2_x + h_x) + h_q * (h_q * st.d2_y + h_y) + 2.0 * h_p * h_q * st.d2_xy,
    }
}

#[inline]
fn lw_from_terms(t: &HamiltonianTerms, dt: f64) -> f64 {
    t.h - 0.5 * dt * t.second_order
}

/// Lax-Wendroff numerical hamiltonian at node `(j, i)`.
pub fn ha_lw(c: &ScalarField2D, u: &ScalarField2D, j: usize, i: usize, dt: f64) -> Result<f64> {
    c.same_grid(u)?;
    let cp = apply_neumann_bc(c);
    let st = apply_neumann_bc(u).stencil(j, i);
    Ok(lw_from_terms(&hamiltonian_terms(&cp, &st, j, i), dt))
}

/// Discontinuous filter: identity on `[-1, 1]`, zero outside.
#[inline]
pub fn filter_discontinuous(r: f64) -> f64 {
    if r.abs() <= 1.0 {
        r
    } else {
        0.0
    }
}

/// Filtered combination of the monotone and high-order updates.
///
/// Equal to `s_m + phi * eps_dt * F((s_a - s_m) / eps_dt)`; written as a
/// selection so the high-order branch returns `s_a` bit for bit.
#[inline]
pub fn filtered_blend(s_m: f64, s_a: f64, regular: bool, eps_dt: f64) -> f64 {
    if regular && (s_a - s_m).abs() <= eps_dt {
        s_a
    } else {
        s_m
    }
}

/// Lower-bound estimate `K |dt/2 * (...) + (h_p+ - h_p-) + (h_q+ - h_q-)|` at one node.
#[inline]
fn epsilon_contribution(c0: f64, st: &DiffStencil, terms: &HamiltonianTerms, dt: f64, k: f64) -> f64 {
    let (p, q) = (st.d_central_x, st.d_central_y);
    let hm = |pm, pp, qm, qp| llf(c0, c0, c0, pm, pp, qm, qp);
    let hp_plus = hm(p, st.d_plus_x, q, q) - hm(p, st.d_minus_x, q, q);
    let hp_minus = hm(st.d_plus_x, p, q, q) - hm(st.d_minus_x, p, q, q);
    let hq_plus = hm(p, p, q, st.d_plus_y) - hm(p, p, q, st.d_minus_y);
    let hq_minus = hm(p, p, st.d_plus_y, q) - hm(p, p, st.d_minus_y, q);
    k * (0.5 * dt * terms.second_order + (hp_plus - hp_minus) + (hq_plus - hq_minus)).abs()
}

fn epsilon_padded(u: &PaddedField, c: &PaddedField, phi: &IndicatorField, dt: f64, k: f64, floor: f64) -> f64 {
    let g = *u.grid();
    let mut eps = floor;
    for i in 0..g.ny {
        for j in 0..g.nx {
            if !phi.get(j, i) {
                continue;
            }
            let st = u.stencil(j, i);
            let terms = hamiltonian_terms(c, &st, j, i);
            eps = eps.max(epsilon_contribution(c.at(j as isize, i as isize), &st, &terms, dt, k));
        }
    }
    eps
}

/// Switching threshold: the largest estimate over regular nodes, at least `floor`.
pub fn epsilon_n(
    u: &ScalarField2D,
    c: &ScalarField2D,
    phi: &IndicatorField,
    dt: f64,
    k: f64,
    floor: f64,
) -> Result<f64> {
    c.same_grid(u)?;
    if k <= 0.5 {
        return Err(Error::InvalidParameter(format!("K = {k} must exceed 1/2")));
    }
    Ok(epsilon_padded(&apply_neumann_bc(u), &apply_neumann_bc(c), phi, dt, k, floor))
}

/// Per-node values of both schemes.
fn both_schemes(u: &PaddedField, c: &PaddedField, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let g = *u.grid();
    let mut s_m = Vec::with_capacity(g.len());
    let mut s_a = Vec::with_capacity(g.len());
    for i in 0..g.ny {
        for j in 0..g.nx {
            let st = u.stencil(j, i);
            let u0 = u.at(j as isize, i as isize);
            let c0 = c.at(j as isize, i as isize);
            s_m.push(u0 - dt * hm_llf(c0, &st, c0, c0));
            s_a.push(u0 - dt * lw_from_terms(&hamiltonian_terms(c, &st, j, i), dt));
        }
    }
    (s_m, s_a)
}

pub fn af_update(
    u: &ScalarField2D,
    c_tilde: &ScalarField2D,
    phi: &IndicatorField,
    eps: f64,
    dt: f64,
) -> Result<ScalarField2D> {
    c_tilde.same_grid(u)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("switching threshold {eps} must be positive")));
    }
    let (s_m, s_a) = both_schemes(&apply_neumann_bc(u), &apply_neumann_bc(c_tilde), dt);
    let eps_dt = eps * dt;
    let values = s_m
        .iter()
        .zip(&s_a)
        .zip(&phi.flags)
        .map(|((&m, &a), &regular)| filtered_blend(m, a, regular, eps_dt))
        .collect();
    Ok(ScalarField2D::from_raw(*u.grid(), values))
}

pub fn monotone_update(u: &ScalarField2D, c_tilde: &ScalarField2D, dt: f64) -> Result<ScalarField2D> {
    c_tilde.same_grid(u)?;
    let up = apply_neumann_bc(u);
    let cp = apply_neumann_bc(c_tilde);
    let g = *u.grid();
    let mut out = Vec::with_capacity(g.len());
    for i in 0..g.ny {
        for j in 0..g.nx {
            let c0 = cp.at(j as isize, i as isize);
            out.push(u.get(j, i) - dt * hm_llf(c0, &up.stencil(j, i), c0, c0));
        }
    }
    Ok(ScalarField2D::from_raw(g, out))
}

/// Unfiltered Lax-Wendroff step. Not stable on its own near kinks; used to
/// check the high-order path in isolation.
pub fn lax_wendroff_update(u: &ScalarField2D, c_tilde: &ScalarField2D, dt: f64) -> Result<ScalarField2D> {
    c_tilde.same_grid(u)?;
    let (_, s_a) = both_schemes(&apply_neumann_bc(u), &apply_neumann_bc(c_tilde), dt);
    Ok(ScalarField2D::from_raw(*u.grid(), s_a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub epsilon: f64,
    pub regular_nodes: usize,
    pub high_order_nodes: usize,
}

/// One AF step: indicator, threshold, filtered update.
pub fn af_step(u: &ScalarField2D, c_tilde: &ScalarField2D, dt: f64, params: &SchemeParams) -> Result<(ScalarField2D, StepStats)> {
    c_tilde.same_grid(u)?;
    let up = apply_neumann_bc(u);
    let cp = apply_neumann_bc(c_tilde);
    let phi = indicator_field_padded(&up, params.m);
    let eps = epsilon_padded(&up, &cp, &phi, dt, params.k, params.epsilon_floor);
    let (s_m, s_a) = both_schemes(&up, &cp, dt);
    let eps_dt = eps * dt;
    let mut high_order_nodes = 0;
    let values = s_m
        .iter()
        .zip(&s_a)
        .zip(&phi.flags)
        .map(|((&m, &a), &regular)| {
            let v = filtered_blend(m, a, regular, eps_dt);
            if regular && (a - m).abs() <= eps_dt {
                high_order_nodes += 1;
            }
            v
        })
        .collect();
    Ok((
        ScalarField2D::from_raw(*u.grid(), values),
        StepStats {
            epsilon: eps,
            regular_nodes: phi.count_regular(),
            high_order_nodes,
        },
    ))
}

/// Advance one step with the configured scheme.
pub fn step(u: &ScalarField2D, c_tilde: &ScalarField2D, dt: f64, params: &SchemeParams) -> Result<ScalarField2D> {
    match params.scheme {
        SchemeKind::Monotone => monotone_update(u, c_tilde, dt),
        SchemeKind::AfLw => af_step(u, c_tilde, dt, params).map(|(next, _)| next),
    }
}
