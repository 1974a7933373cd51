//! Lorentz boosts of sampled spacelike graphs.
//!
//! The boost along `x₁` maps `(x₁, x₂, u)` to
//! `((x₁ - v u)/√(1-v²), x₂, (u - v x₁)/√(1-v²))`. Rows of constant `x₂`
//! stay rows, and along each row the new abscissa is strictly increasing
//! whenever `|∂₁u| < 1`, so the boosted graph is re-sampled row by row with
//! cubic Hermite interpolation. Nodal slopes come from the chain rule
//! applied to fourth-order differences of the input samples.

use crate::dualgeo::CartesianPatch;
use crate::error::{arg, Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedPatch {
    pub patch: CartesianPatch,
    pub velocity: f64,
}

/// Boosts the graph sampled on `patch` with velocity `v` along `x₁` and
/// re-samples it on the largest common `x₁'` range of all rows, keeping the
/// input spacing.
pub fn lorentz_boost(patch: &CartesianPatch, velocity: f64) -> Result<BoostedPatch> {
    if !(velocity.abs() <= 0.9) {
        return arg(format!("boost velocity {velocity} must satisfy |v| <= 0.9"));
    }
    let (nx, ny, h) = (patch.nx, patch.ny, patch.h);
    if nx < 5 || ny < 1 || patch.values.len() != nx * ny {
        return arg("patch needs at least 5 samples per row and a matching value count");
    }
    let gamma = 1.0 / (1.0 - velocity * velocity).sqrt();
    let mut rows = Vec::with_capacity(ny);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for iy in 0..ny {
        let u: Vec<f64> = (0..nx).map(|ix| patch.at(ix, iy)).collect();
        let du = slopes(&u, h);
        let mut xs = Vec::with_capacity(nx);
        let mut us = Vec::with_capacity(nx);
        let mut ds = Vec::with_capacity(nx);
        for ix in 0..nx {
            let x = patch.point(ix, iy)[0];
            if !(du[ix].abs() < 1.0) {
                return Err(Error::FoldOver { row: iy });
            }
            xs.push(gamma * (x - velocity * u[ix]));
            us.push(gamma * (u[ix] - velocity * x));
            ds.push((du[ix] - velocity) / (1.0 - velocity * du[ix]));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::FoldOver { row: iy });
        }
        lo = lo.max(xs[0]);
        hi = hi.min(xs[nx - 1]);
        rows.push((xs, us, ds));
    }
    if !(hi > lo) {
        return arg("boosted rows have no common abscissa range");
    }
    let nx_out = ((hi - lo) / h).floor() as usize + 1;
    let mut values = Vec::with_capacity(nx_out * ny);
    for (xs, us, ds) in &rows {
        let mut k = 0;
        for ix in 0..nx_out {
            let x = (lo + ix as f64 * h).min(hi);
            while k + 2 < xs.len() && xs[k + 1] < x {
                k += 1;
            }
            values.push(hermite(xs[k], xs[k + 1], us[k], us[k + 1], ds[k], ds[k + 1], x));
        }
    }
    Ok(BoostedPatch {
        patch: CartesianPatch { origin: [lo, patch.origin[1]], h, nx: nx_out, ny, values },
        velocity,
    })
}

/// Fourth-order first differences, one-sided near the ends.
fn slopes(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let d = if i >= 2 && i + 2 < n {
                (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / 12.0
            } else if i < 2 {
                let c: [f64; 5] = if i == 0 {
                    [-25.0, 48.0, -36.0, 16.0, -3.0]
                } else {
                    [-3.0, -10.0, 18.0, -6.0, 1.0]
                };
                let b = if i == 0 { 0 } else { i - 1 };
                c.iter().enumerate().map(|(k, ck)| ck * u[b + k]).sum::<f64>() / 12.0
            } else {
                let c: [f64; 5] = if i == n - 1 {
                    [3.0, -16.0, 36.0, -48.0, 25.0]
                } else {
                    [-1.0, 6.0, -18.0, 10.0, 3.0]
                };
                let b = n - 5;
                c.iter().enumerate().map(|(k, ck)| ck * u[b + k]).sum::<f64>() / 12.0
            };
            d / h
        })
        .collect()
}

fn hermite(x0: f64, x1: f64, u0: f64, u1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let dx = x1 - x0;
    let s = (x - x0) / dx;
    let s2 = s * s;
    let s3 = s2 * s;
    u0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + d0 * dx * (s3 - 2.0 * s2 + s)
        + u1 * (-2.0 * s3 + 3.0 * s2)
        + d1 * dx * (s3 - s2)
}

/// Sample-wise check of `√(|x|² + C₀) < u < √(|x|² + C₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest distance to either bound (negative if violated).
    pub min_margin: f64,
}

pub fn check_sandwich(patch: &CartesianPatch, c0: f64, c1: f64) -> SandwichReport {
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for iy in 0..patch.ny {
        for ix in 0..patch.nx {
            let x = patch.point(ix, iy);
            let r2 = x[0] * x[0] + x[1] * x[1];
            let u = patch.at(ix, iy);
            let m = (u - (r2 + c0).sqrt()).min((r2 + c1).sqrt() - u);
            if !(m > 0.0) {
                violations += 1;
            }
            min_margin = min_margin.min(m);
        }
    }
    SandwichReport { samples: patch.nx * patch.ny, violations, min_margin }
}
