//! Geometry of the dual potential on the ball: the matrix
//! `A = w* γ* D²u* γ*`, its eigenvalues, the lift `v = u*/w*`, and discrete
//! Legendre transforms between the graph and the dual picture.

use crate::error::{arg, Error, Result};
use crate::grid::{frame_to_cartesian, ring_neighbours, Neighbours, PolarGrid, ScalarField};
use crate::linalg::Sym2;
use std::sync::Arc;

/// `w* = √(1 - |ξ|²)`.
#[inline]
pub fn w_star(xi: [f64; 2]) -> f64 {
    (1.0 - xi[0] * xi[0] - xi[1] * xi[1]).sqrt()
}

/// Dual potential on the polar grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub field: ScalarField,
    pub t: f64,
}

impl DualState {
    pub fn new(field: ScalarField, t: f64) -> Self {
        DualState { field, t }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.field.grid
    }
}

/// Per-node dual principal radii (ascending) and `w*`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub kappa: Vec<[f64; 2]>,
    pub w_star: Vec<f64>,
}

impl CurvatureField {
    pub fn min_kappa(&self) -> f64 {
        self.kappa.iter().fold(f64::INFINITY, |m, k| m.min(k[0]))
    }

    pub fn max_kappa(&self) -> f64 {
        self.kappa.iter().fold(f64::NEG_INFINITY, |m, k| m.max(k[1]))
    }

    pub fn is_convex(&self) -> bool {
        self.kappa.iter().all(|k| k[0] > 0.0)
    }
}

/// `A` at node `(i, j)` in the orthonormal polar frame `(e_ρ, e_θ)`.
///
/// `γ*` has eigenvalue `w*` along `e_ρ` and `1` along `e_θ`, so
/// `A = [[w³ H_ρρ, w² H_ρθ], [w² H_ρθ, w H_θθ]]`.
#[inline]
pub(crate) fn frame_matrix(g: &PolarGrid, u: &[f64], ghost: &[f64], i: usize, j: usize) -> Sym2 {
    let Neighbours { v, t } = ring_neighbours(g, u, ghost, i, j);
    let nt = g.n_theta();
    let rho = g.rho_nodes()[i];
    let row = &u[i * nt..(i + 1) * nt];
    let jp = if j + 1 == nt { 0 } else { j + 1 };
    let jm = if j == 0 { nt - 1 } else { j - 1 };
    let s1 = g.first_stencil(i);
    let s2 = g.second_stencil(i);
    let u_r = s1.apply(v[1], v[2], v[3]);
    let u_rr = s2.apply4(v[0], v[1], v[2], v[3]);
    let u_tt = ((row[jp] - v[2]) + (row[jm] - v[2])) * g.angular_second_coeff();
    let u_rt = s1.apply(t[0], t[1], t[2]);
    let inv = 1.0 / rho;
    let h_rr = u_rr;
    let h_rt = (u_rt - t[1] * inv) * inv;
    let h_tt = (u_r + u_tt * inv) * inv;
    let w2 = 1.0 - rho * rho;
    let w = w2.sqrt();
    Sym2::new(w * w2 * h_rr, w2 * h_rt, w * h_tt)
}

/// `w* γ* D²u* γ*` at node `(i, j)` in Cartesian components.
pub fn dual_curvature_matrix(state: &DualState, i: usize, j: usize) -> Result<Sym2> {
    let g = state.grid();
    if i >= g.n_rho() || j >= g.n_theta() {
        return arg(format!("node ({i}, {j}) outside the grid"));
    }
    let xi = g.xi(i, j);
    let norm = xi[0].hypot(xi[1]);
    if norm >= 1.0 {
        return Err(Error::OutsideBall { norm });
    }
    let ghost = state.field.ghost_ring()?;
    let a = frame_matrix(g, &state.field.values, ghost, i, j);
    Ok(frame_to_cartesian(g, j, a))
}

fn all_frame_matrices(state: &DualState) -> Result<Vec<Sym2>> {
    let g = state.grid();
    let ghost = state.field.ghost_ring()?;
    let mut out = Vec::with_capacity(g.len());
    for i in 0..g.n_rho() {
        for j in 0..g.n_theta() {
            out.push(frame_matrix(g, &state.field.values, ghost, i, j));
        }
    }
    Ok(out)
}

pub fn dual_curvatures(state: &DualState) -> Result<CurvatureField> {
    let g = state.grid();
    let mats = all_frame_matrices(state)?;
    let mut kappa = Vec::with_capacity(g.len());
    let mut w = Vec::with_capacity(g.len());
    for i in 0..g.n_rho() {
        let rho = g.rho_nodes()[i];
        let wi = (1.0 - rho * rho).sqrt();
        for j in 0..g.n_theta() {
            let ev = mats[g.idx(i, j)].eigenvalues();
            if !(ev[0].is_finite() && ev[1].is_finite()) {
                return Err(Error::Numeric {
                    ring: i,
                    angle: j,
                    what: "non-finite dual curvature matrix".into(),
                });
            }
            kappa.push(ev);
            w.push(wi);
        }
    }
    Ok(CurvatureField { kappa, w_star: w })
}

/// `v = u*/w*` (ghost ring included) and `Λ`, which by the hyperbolic
/// identity `∇̄²v - v I = w* γ* D²u* γ*` is the dual curvature matrix itself
/// (Cartesian components).
pub fn hyperbolic_lift(state: &DualState) -> Result<(ScalarField, Vec<Sym2>)> {
    let g = state.grid().clone();
    let mats = all_frame_matrices(state)?;
    let nt = g.n_theta();
    let mut values = Vec::with_capacity(g.len());
    let mut lambda = Vec::with_capacity(g.len());
    for i in 0..g.n_rho() {
        let rho = g.rho_nodes()[i];
        let w = (1.0 - rho * rho).sqrt();
        for j in 0..nt {
            let k = g.idx(i, j);
            values.push(state.field.values[k] / w);
            lambda.push(frame_to_cartesian(&g, j, mats[k]));
        }
    }
    let wr = (1.0 - g.r() * g.r()).sqrt();
    let ghost = state.field.ghost_ring()?.iter().map(|u| u / wr).collect();
    Ok((ScalarField { grid: g, values, ghost: Some(ghost) }, lambda))
}

/// Graph heights `u(x) = sup_ξ (x·ξ - u*(ξ))` over all grid and ghost nodes.
pub fn legendre_dual_to_primal(state: &DualState, x_samples: &[[f64; 2]]) -> Result<Vec<f64>> {
    if x_samples.is_empty() {
        return arg("no sample points");
    }
    let g = state.grid();
    let ghost = state.field.ghost_ring()?;
    let mut nodes: Vec<([f64; 2], f64)> = Vec::with_capacity(g.len() + g.n_theta());
    for i in 0..g.n_rho() {
        for j in 0..g.n_theta() {
            nodes.push((g.xi(i, j), state.field.at(i, j)));
        }
    }
    for (j, &u) in ghost.iter().enumerate() {
        nodes.push((g.ghost_xi(j), u));
    }
    Ok(x_samples
        .iter()
        .map(|x| {
            nodes
                .iter()
                .map(|(xi, u)| x[0] * xi[0] + x[1] * xi[1] - u)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

/// Graph samples on a uniform Cartesian patch, stored row-major in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianPatch {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl CartesianPatch {
    /// Samples `u` on the square `[-half_width, half_width]²` with spacing `h`.
    pub fn sample(half_width: f64, h: f64, u: impl Fn([f64; 2]) -> f64) -> Self {
        let n = (2.0 * half_width / h).round() as usize + 1;
        let origin = [-half_width, -half_width];
        let mut values = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                values.push(u([origin[0] + ix as f64 * h, origin[1] + iy as f64 * h]));
            }
        }
        CartesianPatch { origin, h, nx: n, ny: n, values }
    }

    pub fn point(&self, ix: usize, iy: usize) -> [f64; 2] {
        [self.origin[0] + ix as f64 * self.h, self.origin[1] + iy as f64 * self.h]
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }
}

/// Dual potential `u*(ξ) = sup_x (x·ξ - u(x))` over the patch samples,
/// evaluated at every node and on the ghost ring of `grid`.
pub fn legendre_primal_to_dual(patch: &CartesianPatch, grid: Arc<PolarGrid>) -> Result<ScalarField> {
    if patch.values.len() != patch.nx * patch.ny || patch.values.is_empty() {
        return arg("patch shape does not match its values");
    }
    for iy in 0..patch.ny {
        for ix in 0..patch.nx {
            let u = patch.at(ix, iy);
            if ix + 1 < patch.nx && (patch.at(ix + 1, iy) - u).abs() >= patch.h {
                return Err(Error::Ingestion(format!(
                    "samples ({ix}, {iy}) and ({}, {iy}) are not spacelike",
                    ix + 1
                )));
            }
            if iy + 1 < patch.ny && (patch.at(ix, iy + 1) - u).abs() >= patch.h {
                return Err(Error::Ingestion(format!(
                    "samples ({ix}, {iy}) and ({ix}, {}) are not spacelike",
                    iy + 1
                )));
            }
        }
    }
    Ok(ScalarField::from_fn(grid, |xi| patch_conjugate(patch, xi)))
}

/// `sup_x (x·ξ - u(x))` over the patch samples at a single point.
pub fn patch_conjugate(patch: &CartesianPatch, xi: [f64; 2]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for iy in 0..patch.ny {
        for ix in 0..patch.nx {
            let x = patch.point(ix, iy);
            best = best.max(x[0] * xi[0] + x[1] * xi[1] - patch.at(ix, iy));
        }
    }
    best
}
