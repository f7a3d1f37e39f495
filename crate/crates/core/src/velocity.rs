//! Edge-stopping velocities and their extension to every level set.

use crate::error::{Error, Result};
use crate::grid::{apply_neumann_bc, ScalarField2D};

/// Below this gradient norm the front normal is undefined.
pub const GRADIENT_EPS: f64 = 1e-10;

/// Which classical edge-stopping function drives the front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalVelocity {
    /// `1 / (1 + g^mu)`
    C1 { mu: f64 },
    /// `1 - (g - min g) / (max g - min g)`
    C2,
}

/// How the extended velocity is read back at a foot point that falls between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    Bilinear,
    /// Velocity of the foot-cell corner where `|u|` is smallest.
    #[default]
    MinAbsNeighbor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityModel {
    Classical(ClassicalVelocity),
    Modified {
        base: ClassicalVelocity,
        selection: Selection,
    },
}

impl VelocityModel {
    pub fn base(&self) -> ClassicalVelocity {
        match *self {
            VelocityModel::Classical(b) => b,
            VelocityModel::Modified { base, .. } => base,
        }
    }

    pub fn is_modified(&self) -> bool {
        matches!(self, VelocityModel::Modified { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if let ClassicalVelocity::C1 { mu } = self.base() {
            if !(mu >= 1.0 && mu.is_finite()) {
                return Err(Error::InvalidParameter(format!("mu = {mu} must be >= 1")));
            }
        }
        Ok(())
    }
}

/// Signed distance from the level set `{u = C}` to the zero level, as a
/// function of `C`, for a known initial datum.
#[derive(Debug, Clone, PartialEq)]
pub enum DMap {
    /// `d = 0`: the foot point is the node itself.
    Zero,
    /// Signed-distance data.
    Identity,
    /// Rotated parabola `rho^2 - r^2` capped at `cap`:
    /// `d(C) = sqrt(C + r^2) - r` for `C` in `[-r^2, cap]`.
    Paraboloid { radius: f64, cap: f64 },
    /// Planar faces of the given slope, floored at `cap`: `d(C) = max(C, cap) / slope`.
    Pyramid { slope: f64, cap: f64 },
    /// Map for the negated field: `d'(C) = -d(-C)`.
    Reflected(Box<DMap>),
}

impl DMap {
    pub fn eval(&self, level: f64) -> f64 {
        match self {
            DMap::Zero => 0.0,
            DMap::Identity => level,
            DMap::Paraboloid { radius, cap } => {
                let r2 = radius * radius;
                (level.clamp(-r2, *cap) + r2).sqrt() - radius
            }
            DMap::Pyramid { slope, cap } => level.max(*cap) / slope,
            DMap::Reflected(inner) => -inner.eval(-level),
        }
    }

    pub fn reflected(self) -> DMap {
        match self {
            DMap::Reflected(inner) => *inner,
            DMap::Zero => DMap::Zero,
            DMap::Identity => DMap::Identity,
            other => DMap::Reflected(Box::new(other)),
        }
    }
}

/// `k_reg` explicit heat-equation steps with `tau = min(dx, dy)^2 / 4`.
pub fn gaussian_regularize(field: &ScalarField2D, k_reg: usize) -> ScalarField2D {
    let g = *field.grid();
    let tau = g.dx.min(g.dy).powi(2) / 4.0;
    let mut current = field.clone();
    for _ in 0..k_reg {
        let padded = apply_neumann_bc(&current);
        let mut next = Vec::with_capacity(g.len());
        for i in 0..g.ny {
            for j in 0..g.nx {
                let s = padded.stencil(j, i);
                next.push(current.get(j, i) + tau * (s.d2_x + s.d2_y));
            }
        }
        current = ScalarField2D::from_raw(g, next);
    }
    current
}

pub fn gradient_magnitude(field: &ScalarField2D) -> ScalarField2D {
    let g = *field.grid();
    let padded = apply_neumann_bc(field);
    let mut out = Vec::with_capacity(g.len());
    for i in 0..g.ny {
        for j in 0..g.nx {
            let (p, q) = padded.central_gradient(j, i);
            out.push(p.hypot(q));
        }
    }
    ScalarField2D::from_raw(g, out)
}

pub fn classical_velocity_c1(image_field: &ScalarField2D, mu: f64, k_reg: usize) -> Result<ScalarField2D> {
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must be >= 1")));
    }
    let grad = gradient_magnitude(&gaussian_regularize(image_field, k_reg));
    Ok(grad.map(|g| 1.0 / (1.0 + g.powf(mu))))
}

pub fn classical_velocity_c2(image_field: &ScalarField2D, k_reg: usize) -> Result<ScalarField2D> {
    let grad = gradient_magnitude(&gaussian_regularize(image_field, k_reg));
    let (lo, hi) = (grad.min(), grad.max());
    if hi <= lo {
        return Err(Error::DegenerateInput(
            "smoothed gradient magnitude is constant; c2 is undefined".into(),
        ));
    }
    Ok(grad.map(|g| (1.0 - (g - lo) / (hi - lo)).clamp(0.0, 1.0)))
}

pub fn classical_velocity(image_field: &ScalarField2D, kind: ClassicalVelocity, k_reg: usize) -> Result<ScalarField2D> {
    match kind {
        ClassicalVelocity::C1 { mu } => classical_velocity_c1(image_field, mu, k_reg),
        ClassicalVelocity::C2 => classical_velocity_c2(image_field, k_reg),
    }
}

/// Characteristic-based velocity: each node reads `c` at the point
/// `x - d(u) grad(u)/|grad(u)|` on the zero level set.
///
/// Foot points are clamped to the domain. Where `|grad u| < GRADIENT_EPS`
/// the node keeps its own velocity.
pub fn extend_velocity(c: &ScalarField2D, u: &ScalarField2D, dmap: &DMap, selection: Selection) -> Result<ScalarField2D> {
    c.same_grid(u)?;
    let g = *u.grid();
    let padded = apply_neumann_bc(u);
    let (max_j, max_i) = ((g.nx - 1) as f64, (g.ny - 1) as f64);
    let mut out = Vec::with_capacity(g.len());
    for i in 0..g.ny {
        for j in 0..g.nx {
            let (p, q) = padded.central_gradient(j, i);
            let norm = p.hypot(q);
            if norm < GRADIENT_EPS {
                out.push(c.get(j, i));
                continue;
            }
            let level = u.get(j, i);
            let d = dmap.eval(level);
            // Foot point in fractional index space; exact node when d == 0.
            let fj = (j as f64 - d * p / (norm * g.dx)).clamp(0.0, max_j);
            let fi = (i as f64 - d * q / (norm * g.dy)).clamp(0.0, max_i);
            let (j0, i0) = (fj.floor() as usize, fi.floor() as usize);
            let (j1, i1) = (fj.ceil() as usize, fi.ceil() as usize);
            let value = match selection {
                Selection::Bilinear => {
                    let (tx, ty) = (fj - j0 as f64, fi - i0 as f64);
                    let bottom = (1.0 - tx) * c.get(j0, i0) + tx * c.get(j1, i0);
                    let top = (1.0 - tx) * c.get(j0, i1) + tx * c.get(j1, i1);
                    (1.0 - ty) * bottom + ty * top
                }
                Selection::MinAbsNeighbor => {
                    let mut best = (j0, i0);
                    let mut best_abs = u.get(j0, i0).abs();
                    for cand in [(j1, i0), (j0, i1), (j1, i1)] {
                        let a = u.get(cand.0, cand.1).abs();
                        if a < best_abs {
                            best = cand;
                            best_abs = a;
                        }
                    }
                    c.get(best.0, best.1)
                }
            };
            out.push(value);
        }
    }
    Ok(ScalarField2D::from_raw(g, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> GridSpec {
        GridSpec::centered_square(2.0, n).unwrap()
    }

    #[test]
    fn regularize_identity_and_constants() {
        let g = grid(17);
        let f = ScalarField2D::from_fn(g, |x, y| (x * 3.0).sin() * y);
        assert_eq!(gaussian_regularize(&f, 0), f);
        let c = ScalarField2D::constant(g, 0.7);
        assert_eq!(gaussian_regularize(&c, 9), c);
    }

    #[test]
    fn regularize_preserves_mean() {
        let g = GridSpec::new(-1.0, 2.0, 0.0, 1.0, 23, 11).unwrap();
        let f = ScalarField2D::from_fn(g, |x, y| if x * x + y > 1.0 { 1.0 } else { 0.0 } + 0.1 * x);
        let before = f.mean();
        let mut cur = f;
        for _ in 0..5 {
            cur = gaussian_regularize(&cur, 1);
            assert_abs_diff_eq!(cur.mean(), before, epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_of_simple_fields() {
        let g = grid(21);
        assert_eq!(gradient_magnitude(&ScalarField2D::constant(g, 2.0)).max(), 0.0);
        let gx = gradient_magnitude(&ScalarField2D::from_fn(g, |x, _| x));
        let gd = gradient_magnitude(&ScalarField2D::from_fn(g, |x, y| (x + y) / 2f64.sqrt()));
        for i in 1..20 {
            for j in 1..20 {
                assert_abs_diff_eq!(gx.get(j, i), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(gd.get(j, i), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn c1_formula() {
        let g = grid(21);
        // u = x has unit gradient in the interior, u = 3x has gradient 3
        let c = classical_velocity_c1(&ScalarField2D::from_fn(g, |x, _| x), 2.0, 0).unwrap();
        assert_abs_diff_eq!(c.get(10, 10), 0.5, epsilon = 1e-12);
        let c = classical_velocity_c1(&ScalarField2D::from_fn(g, |x, _| 3.0 * x), 1.0, 0).unwrap();
        assert_abs_diff_eq!(c.get(10, 10), 0.25, epsilon = 1e-12);
        let c = classical_velocity_c1(&ScalarField2D::constant(g, 1.0), 2.0, 0).unwrap();
        assert_eq!(c.min(), 1.0);
        assert!(classical_velocity_c1(&ScalarField2D::constant(g, 1.0), 0.5, 0).is_err());
    }

    #[test]
    fn c2_formula() {
        let g = grid(21);
        // |x| has gradient 1 away from the kink, 0 at the kink node and at the mirrored edges
        let f = ScalarField2D::from_fn(g, |x, _| x.abs());
        let grad = gradient_magnitude(&f);
        let c = classical_velocity_c2(&f, 0).unwrap();
        let (lo, hi) = (grad.min(), grad.max());
        for k in 0..g.len() {
            let expected = 1.0 - (grad.values()[k] - lo) / (hi - lo);
            assert_abs_diff_eq!(c.values()[k], expected, epsilon = 1e-15);
            if grad.values()[k] == hi {
                assert_eq!(c.values()[k], 0.0);
            }
            if grad.values()[k] == lo {
                assert_eq!(c.values()[k], 1.0);
            }
        }
        let mid = 1.0 - ((lo + hi) / 2.0 - lo) / (hi - lo);
        assert_abs_diff_eq!(mid, 0.5, epsilon = 1e-15);
        assert!(matches!(
            classical_velocity_c2(&ScalarField2D::constant(g, 0.3), 2),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn dmaps() {
        let p = DMap::Paraboloid { radius: 0.5, cap: 0.125 };
        assert_eq!(p.eval(0.0), 0.0);
        assert_abs_diff_eq!(p.eval(-0.25), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eval(-1.0), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eval(1.0), p.eval(0.125), epsilon = 1e-15);
        let y = DMap::Pyramid { slope: 2.0, cap: -0.2 };
        assert_eq!(y.eval(0.0), 0.0);
        assert_abs_diff_eq!(y.eval(-0.1), -0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(y.eval(-0.5), -0.1, epsilon = 1e-15);
        let r = p.clone().reflected();
        assert_abs_diff_eq!(r.eval(0.25), 0.5, epsilon = 1e-15);
        assert_eq!(r.reflected(), p);
        // nondecreasing
        for m in [DMap::Identity, p, y] {
            let mut prev = f64::NEG_INFINITY;
            for k in -100..=100 {
                let v = m.eval(k as f64 * 0.01);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    fn sample_velocity(g: GridSpec) -> ScalarField2D {
        ScalarField2D::from_fn(g, |x, y| 0.5 + 0.4 * (2.0 * x).sin() * (1.5 * y).cos())
    }

    #[test]
    fn extension_of_constant_velocity() {
        let g = grid(41);
        let u = ScalarField2D::from_fn(g, |x, y| x.hypot(y) - 0.8);
        let c = ScalarField2D::constant(g, 0.37);
        for sel in [Selection::Bilinear, Selection::MinAbsNeighbor] {
            let ct = extend_velocity(&c, &u, &DMap::Identity, sel).unwrap();
            assert!(ct.values().iter().all(|&v| v == 0.37));
        }
    }

    #[test]
    fn zero_dmap_is_identity() {
        let g = grid(33);
        let u = ScalarField2D::from_fn(g, |x, y| x * x + 0.5 * y - 0.3);
        let c = sample_velocity(g);
        for sel in [Selection::Bilinear, Selection::MinAbsNeighbor] {
            assert_eq!(extend_velocity(&c, &u, &DMap::Zero, sel).unwrap(), c);
        }
    }

    #[test]
    fn zero_level_nodes_keep_their_velocity() {
        // u = x - x_j vanishes on a node column
        let g = grid(21);
        let x0 = g.x(7);
        let u = ScalarField2D::from_fn(g, |x, _| x - x0);
        let c = sample_velocity(g);
        let ct = extend_velocity(&c, &u, &DMap::Identity, Selection::MinAbsNeighbor).unwrap();
        for i in 0..21 {
            assert_eq!(ct.get(7, i), c.get(7, i));
            // every node of the row reads from the zero column
            assert_eq!(ct.get(12, i), c.get(7, i));
        }
    }

    #[test]
    fn flat_nodes_fall_back() {
        let g = grid(21);
        let u = ScalarField2D::from_fn(g, |x, y| (x * x + y * y - 0.25).min(0.125));
        let c = sample_velocity(g);
        let ct = extend_velocity(&c, &u, &DMap::Paraboloid { radius: 0.5, cap: 0.125 }, Selection::Bilinear).unwrap();
        // the cap plateau and the vertex have zero central gradient
        assert_eq!(ct.get(0, 0), c.get(0, 0));
        assert_eq!(ct.get(10, 10), c.get(10, 10));
    }

    #[test]
    fn extension_stays_within_velocity_range() {
        let g = grid(31);
        let u = ScalarField2D::from_fn(g, |x, y| (x - 0.2).hypot(y + 0.1) - 0.6 + 0.1 * (3.0 * x).sin());
        let c = sample_velocity(g);
        for sel in [Selection::Bilinear, Selection::MinAbsNeighbor] {
            let ct = extend_velocity(&c, &u, &DMap::Identity, sel).unwrap();
            assert!(ct.min() >= c.min() && ct.max() <= c.max());
        }
    }
}
