//! Cell-centred polar grid on the disk `B_r` and finite-difference calculus
//! on it.
//!
//! Nodes sit at `ρ_i = (i + ½) h_ρ`, `θ_j = j h_θ`; values are stored
//! ring-major (`i * n_theta + j`). A ghost ring at `ρ = r` carries the
//! Dirichlet data. Radial stencils through the centre use the antipodal node
//! `(0, j + n_theta/2)` as the value at `ρ = -ρ_0` on the same line.
//!
//! Angular differences are fitted to the modes `1, cos θ, sin θ`, so linear
//! fields are differentiated exactly.

use crate::error::{arg, Error, Result};
use crate::linalg::Sym2;
use std::f64::consts::PI;
use std::sync::Arc;

/// Radial difference weights at one ring. The centre weight is implied by
/// consistency (weights sum to zero), so constants are annihilated exactly.
/// `m2` couples to the node two spacings below and is only nonzero on the
/// outermost ring, whose ghost neighbour sits at half spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub m2: f64,
    pub m: f64,
    pub p: f64,
}

impl Stencil {
    /// First derivative from nodes at `-h1, 0, h2`.
    fn first(h1: f64, h2: f64) -> Self {
        Stencil { m2: 0.0, m: -h2 / (h1 * (h1 + h2)), p: h1 / (h2 * (h1 + h2)) }
    }

    /// Second derivative from nodes at `-h1, 0, h2`.
    fn second(h1: f64, h2: f64) -> Self {
        Stencil { m2: 0.0, m: 2.0 / (h1 * (h1 + h2)), p: 2.0 / (h2 * (h1 + h2)) }
    }

    /// Second derivative from nodes at `-2h, -h, 0, h/2`, second order.
    fn second_outer(h: f64) -> Self {
        let s = 1.0 / (h * h);
        Stencil { m2: -0.2 * s, m: 2.0 * s, p: 3.2 * s }
    }

    #[inline]
    pub fn apply(&self, um: f64, uc: f64, up: f64) -> f64 {
        self.m * (um - uc) + self.p * (up - uc)
    }

    #[inline]
    pub fn apply4(&self, um2: f64, um: f64, uc: f64, up: f64) -> f64 {
        self.m2 * (um2 - uc) + self.m * (um - uc) + self.p * (up - uc)
    }

    /// Sum of absolute weights including the implied centre weight.
    pub fn abs_sum(&self) -> f64 {
        self.m2.abs() + self.m.abs() + self.p.abs() + (self.m2 + self.m + self.p).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    r: f64,
    n_rho: usize,
    n_theta: usize,
    h_rho: f64,
    h_theta: f64,
    rho: Vec<f64>,
    theta: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
    /// `1 / (2 sin h_θ)`
    at: f64,
    /// `1 / (4 sin²(h_θ/2))`
    att: f64,
}

pub fn build_grid(r: f64, n_rho: usize, n_theta: usize) -> Result<Arc<PolarGrid>> {
    PolarGrid::new(r, n_rho, n_theta).map(Arc::new)
}

impl PolarGrid {
    pub fn new(r: f64, n_rho: usize, n_theta: usize) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return arg(format!("radius r = {r} must lie in (0, 1)"));
        }
        if n_rho < 1 {
            return arg("n_rho must be at least 1");
        }
        if n_theta < 4 || !n_theta.is_multiple_of(2) {
            return arg(format!("n_theta = {n_theta} must be even and at least 4"));
        }
        let h_rho = r / n_rho as f64;
        let h_theta = 2.0 * PI / n_theta as f64;
        let rho: Vec<f64> = (0..n_rho).map(|i| (i as f64 + 0.5) * h_rho).collect();
        let theta: Vec<f64> = (0..n_theta).map(|j| j as f64 * h_theta).collect();
        let cos = theta.iter().map(|t| t.cos()).collect();
        let sin = theta.iter().map(|t| t.sin()).collect();
        let mut d1 = Vec::with_capacity(n_rho);
        let mut d2 = Vec::with_capacity(n_rho);
        for i in 0..n_rho {
            let h1 = if i == 0 { 2.0 * rho[0] } else { rho[i] - rho[i - 1] };
            let h2 = if i + 1 == n_rho { r - rho[i] } else { rho[i + 1] - rho[i] };
            d1.push(Stencil::first(h1, h2));
            if i + 1 == n_rho && n_rho >= 2 {
                d2.push(Stencil::second_outer(h_rho));
            } else {
                d2.push(Stencil::second(h1, h2));
            }
        }
        let at = 1.0 / (2.0 * h_theta.sin());
        let att = 1.0 / (4.0 * (0.5 * h_theta).sin().powi(2));
        Ok(PolarGrid { r, n_rho, n_theta, h_rho, h_theta, rho, theta, cos, sin, d1, d2, at, att })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn n_rho(&self) -> usize {
        self.n_rho
    }
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn h_rho(&self) -> f64 {
        self.h_rho
    }
    pub fn h_theta(&self) -> f64 {
        self.h_theta
    }
    pub fn rho_nodes(&self) -> &[f64] {
        &self.rho
    }
    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta
    }
    pub fn len(&self) -> usize {
        self.n_rho * self.n_theta
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }
    pub fn cos_theta(&self) -> &[f64] {
        &self.cos
    }
    pub fn sin_theta(&self) -> &[f64] {
        &self.sin
    }
    pub fn first_stencil(&self, i: usize) -> Stencil {
        self.d1[i]
    }
    pub fn second_stencil(&self, i: usize) -> Stencil {
        self.d2[i]
    }
    /// Coefficient of the fitted first angular difference.
    pub fn angular_first_coeff(&self) -> f64 {
        self.at
    }
    /// Coefficient of the fitted second angular difference.
    pub fn angular_second_coeff(&self) -> f64 {
        self.att
    }

    /// Cartesian position of node `(i, j)`.
    pub fn xi(&self, i: usize, j: usize) -> [f64; 2] {
        [self.rho[i] * self.cos[j], self.rho[i] * self.sin[j]]
    }

    /// Cartesian position of ghost node `j` on `|ξ| = r`.
    pub fn ghost_xi(&self, j: usize) -> [f64; 2] {
        [self.r * self.cos[j], self.r * self.sin[j]]
    }

    /// Angular index of the antipodal partner.
    #[inline]
    pub fn antipode(&self, j: usize) -> usize {
        (j + self.n_theta / 2) % self.n_theta
    }
}

/// Scalar values on a polar grid plus the optional ghost ring at `ρ = r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Arc<PolarGrid>,
    pub values: Vec<f64>,
    pub ghost: Option<Vec<f64>>,
}

impl ScalarField {
    pub fn new(grid: Arc<PolarGrid>, values: Vec<f64>, ghost: Option<Vec<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return arg(format!("field has {} values, grid has {} nodes", values.len(), grid.len()));
        }
        if let Some(g) = &ghost {
            if g.len() != grid.n_theta {
                return arg(format!("ghost ring has {} values, expected {}", g.len(), grid.n_theta));
            }
        }
        Ok(ScalarField { grid, values, ghost })
    }

    /// Samples `f(ξ)` at every node and on the ghost ring.
    pub fn from_fn(grid: Arc<PolarGrid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_rho {
            for j in 0..grid.n_theta {
                values.push(f(grid.xi(i, j)));
            }
        }
        let ghost = (0..grid.n_theta).map(|j| f(grid.ghost_xi(j))).collect();
        ScalarField { grid, values, ghost: Some(ghost) }
    }

    /// Samples a radial profile `g(ρ)` once per ring and broadcasts it, so the
    /// field is exactly rotation invariant.
    pub fn from_radial(grid: Arc<PolarGrid>, g: impl Fn(f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_rho {
            let v = g(grid.rho[i]);
            values.extend(std::iter::repeat_n(v, grid.n_theta));
        }
        let gv = g(grid.r);
        ScalarField { ghost: Some(vec![gv; grid.n_theta]), grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn ghost_ring(&self) -> Result<&[f64]> {
        self.ghost.as_deref().ok_or(Error::MissingBoundary)
    }

    /// Field rotated by `shift` angular steps: the new value at `θ_j` is the
    /// old value at `θ_{j - shift}`.
    pub fn rotated(&self, shift: usize) -> Self {
        let nt = self.grid.n_theta;
        let s = shift % nt;
        let rot = |row: &[f64]| -> Vec<f64> { (0..nt).map(|j| row[(j + nt - s) % nt]).collect() };
        let values = self.values.chunks(nt).flat_map(rot).collect();
        let ghost = self.ghost.as_deref().map(rot);
        ScalarField { grid: self.grid.clone(), values, ghost }
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Interpolates the field at radius `rho ∈ [0, r]` along the ray of
    /// angle index `j`, with four-point Lagrange interpolation over the line
    /// through the origin (antipodal nodes supply negative radii, the ghost
    /// ring supplies `ρ = r`).
    pub fn interpolate_ray(&self, j: usize, rho: f64) -> Result<f64> {
        let g = &self.grid;
        let ghost = self.ghost_ring()?;
        let ja = g.antipode(j);
        let n = g.n_rho;
        // Line samples ordered by signed abscissa: antipodal ring reversed,
        // then the ray itself, then the ghost.
        let sample = |k: usize| -> (f64, f64) {
            if k < n {
                let i = n - 1 - k;
                (-g.rho[i], self.at(i, ja))
            } else if k < 2 * n {
                let i = k - n;
                (g.rho[i], self.at(i, j))
            } else {
                (g.r, ghost[j])
            }
        };
        let total = 2 * n + 1;
        if !(rho >= 0.0 && rho <= g.r) {
            return arg(format!("radius {rho} outside [0, {}]", g.r));
        }
        if total < 4 {
            return arg("too few line samples for cubic interpolation");
        }
        // First sample index at or beyond rho.
        let mut hi = n;
        while hi < total - 1 && sample(hi).0 < rho {
            hi += 1;
        }
        let start = hi.saturating_sub(2).min(total - 4);
        let pts: Vec<(f64, f64)> = (start..start + 4).map(sample).collect();
        let mut acc = 0.0;
        for (a, &(xa, ya)) in pts.iter().enumerate() {
            let mut l = 1.0;
            for (b, &(xb, _)) in pts.iter().enumerate() {
                if a != b {
                    l *= (rho - xb) / (xa - xb);
                }
            }
            acc += l * ya;
        }
        Ok(acc)
    }
}

/// Polar partial derivatives at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDerivs {
    pub u_r: Vec<f64>,
    pub u_rr: Vec<f64>,
    pub u_t: Vec<f64>,
    pub u_tt: Vec<f64>,
    pub u_rt: Vec<f64>,
}

impl PolarDerivs {
    /// Hessian at node `k` (on ring `i`) in the orthonormal polar frame
    /// `(e_ρ, e_θ)`.
    #[inline]
    pub fn frame_hessian(&self, rho: f64, k: usize) -> Sym2 {
        Sym2::new(
            self.u_rr[k],
            self.u_rt[k] / rho - self.u_t[k] / (rho * rho),
            self.u_r[k] / rho + self.u_tt[k] / (rho * rho),
        )
    }
}

/// Values along angle `j` seen by the radial stencil at ring `i`: the node
/// two spacings below (only meaningful on the outermost ring), rings `i-1`,
/// `i`, `i+1`, and the fitted angular first derivatives on the last three.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Neighbours {
    pub v: [f64; 4],
    pub t: [f64; 3],
}

#[inline]
pub(crate) fn ring_neighbours(g: &PolarGrid, u: &[f64], ghost: &[f64], i: usize, j: usize) -> Neighbours {
    let nt = g.n_theta;
    let at = g.at;
    let wrap = |j: usize| -> (usize, usize) {
        (if j + 1 == nt { 0 } else { j + 1 }, if j == 0 { nt - 1 } else { j - 1 })
    };
    let row = |i: usize| &u[i * nt..(i + 1) * nt];
    let (jp, jm) = wrap(j);
    let ja = g.antipode(j);
    let (vm, tm) = if i == 0 {
        let (jap, jam) = wrap(ja);
        let r0 = row(0);
        (r0[ja], (r0[jap] - r0[jam]) * at)
    } else {
        let r = row(i - 1);
        (r[j], (r[jp] - r[jm]) * at)
    };
    let vm2 = if i + 1 == g.n_rho && i >= 1 {
        if i >= 2 {
            row(i - 2)[j]
        } else {
            row(0)[ja]
        }
    } else {
        0.0
    };
    let rc = row(i);
    let (vc, tc) = (rc[j], (rc[jp] - rc[jm]) * at);
    let (vp, tp) = if i + 1 == g.n_rho {
        (ghost[j], (ghost[jp] - ghost[jm]) * at)
    } else {
        let r = row(i + 1);
        (r[j], (r[jp] - r[jm]) * at)
    };
    Neighbours { v: [vm2, vm, vc, vp], t: [tm, tc, tp] }
}

pub fn polar_derivatives(field: &ScalarField) -> Result<PolarDerivs> {
    let g = &*field.grid;
    let ghost = field.ghost_ring()?;
    let n = g.len();
    let nt = g.n_theta;
    let mut d = PolarDerivs {
        u_r: vec![0.0; n],
        u_rr: vec![0.0; n],
        u_t: vec![0.0; n],
        u_tt: vec![0.0; n],
        u_rt: vec![0.0; n],
    };
    for i in 0..g.n_rho {
        let (s1, s2) = (g.d1[i], g.d2[i]);
        for j in 0..nt {
            let k = g.idx(i, j);
            let Neighbours { v, t } = ring_neighbours(g, &field.values, ghost, i, j);
            let jp = if j + 1 == nt { 0 } else { j + 1 };
            let jm = if j == 0 { nt - 1 } else { j - 1 };
            d.u_r[k] = s1.apply(v[1], v[2], v[3]);
            d.u_rr[k] = s2.apply4(v[0], v[1], v[2], v[3]);
            d.u_t[k] = t[1];
            d.u_tt[k] = ((field.at(i, jp) - v[2]) + (field.at(i, jm) - v[2])) * g.att;
            d.u_rt[k] = s1.apply(t[0], t[1], t[2]);
        }
    }
    Ok(d)
}

/// Cartesian gradient at every node.
pub fn gradient(field: &ScalarField) -> Result<Vec<[f64; 2]>> {
    let g = &*field.grid;
    let d = polar_derivatives(field)?;
    let mut out = Vec::with_capacity(g.len());
    for i in 0..g.n_rho {
        for j in 0..g.n_theta {
            let k = g.idx(i, j);
            let (c, s) = (g.cos[j], g.sin[j]);
            let gr = d.u_r[k];
            let gt = d.u_t[k] / g.rho[i];
            out.push([gr * c - gt * s, gr * s + gt * c]);
        }
    }
    Ok(out)
}

/// Rotates a polar-frame tensor at angle index `j` into Cartesian components.
#[inline]
pub fn frame_to_cartesian(g: &PolarGrid, j: usize, h: Sym2) -> Sym2 {
    let (c, s) = (g.cos[j], g.sin[j]);
    // columns of the rotation are e_ρ = (c, s) and e_θ = (-s, c)
    h.congruence([[c, s], [-s, c]])
}

/// Cartesian Hessian at every node.
pub fn hessian(field: &ScalarField) -> Result<Vec<Sym2>> {
    let g = &*field.grid;
    let d = polar_derivatives(field)?;
    let mut out = Vec::with_capacity(g.len());
    for i in 0..g.n_rho {
        for j in 0..g.n_theta {
            let h = d.frame_hessian(g.rho[i], g.idx(i, j));
            out.push(frame_to_cartesian(g, j, h));
        }
    }
    Ok(out)
}
