//! Rescaled-flow diagnostics, a priori bound monitors, and the Lorentz boost
//! generator for test data.

mod boost;

pub use boost::{check_sandwich, lorentz_boost, BoostedPatch, SandwichReport};

use crate::curvfun::{CurvatureSpec, PlanarLaw};
use crate::dualgeo::{dual_curvatures, hyperbolic_lift, DualState};
use crate::error::{arg, Error, Result};
use crate::flow::{scale_factor, StepRecord, Trajectory};
use crate::grid::ScalarField;
use crate::linalg::Sym2;
use serde::Serialize;

/// Rescaled time `τ̃ = ln((1+α) t̃) / (1+α)` with `t̃ = t + 1/(1+α)`.
pub fn rescaled_time(alpha: f64, t: f64) -> f64 {
    ((1.0 + alpha) * t + 1.0).ln() / (1.0 + alpha)
}

/// One state in rescaled variables `ũ* = u*/[(1+α)t̃]^{1/(1+α)}`.
#[derive(Debug, Clone)]
pub struct RescaledFrame {
    pub t: f64,
    pub tau_tilde: f64,
    pub u_tilde_star: ScalarField,
    pub v_tilde: ScalarField,
    pub lambda_tilde: Vec<Sym2>,
    /// `Φ = f_*(κ̃*)^{-α} + ṽ` at every node.
    pub phi: ScalarField,
}

/// Rescales a single state; `Φ` uses the planar form of `spec`.
pub fn rescale_state(state: &DualState, spec: &CurvatureSpec) -> Result<RescaledFrame> {
    let alpha = spec.alpha();
    let law = PlanarLaw::new(spec)?;
    let s = scale_factor(alpha, state.t);
    let f = &state.field;
    let scaled = ScalarField {
        grid: f.grid.clone(),
        values: f.values.iter().map(|u| u / s).collect(),
        ghost: f.ghost.as_ref().map(|g| g.iter().map(|u| u / s).collect()),
    };
    let st = DualState::new(scaled, state.t);
    let (v, lambda) = hyperbolic_lift(&st)?;
    let kappa = dual_curvatures(&st)?;
    let phi_vals = kappa
        .kappa
        .iter()
        .zip(&v.values)
        .map(|(k, vv)| {
            if k[0] > 0.0 {
                law.inverse_speed(0.5 * (k[0] + k[1]), k[0] * k[1]) + vv
            } else {
                f64::NAN
            }
        })
        .collect();
    let phi = ScalarField { grid: f.grid.clone(), values: phi_vals, ghost: None };
    Ok(RescaledFrame {
        t: state.t,
        tau_tilde: rescaled_time(alpha, state.t),
        u_tilde_star: st.field,
        v_tilde: v,
        lambda_tilde: lambda,
        phi,
    })
}

/// Frames at the given times, which must coincide with snapshot times of
/// the trajectory.
pub fn rescale(traj: &Trajectory, frame_times: &[f64]) -> Result<Vec<RescaledFrame>> {
    let spec = traj.problem.spec();
    frame_times
        .iter()
        .map(|&t| {
            let state = traj
                .snapshots
                .iter()
                .find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
                .ok_or_else(|| Error::Argument(format!("no snapshot at t = {t} in the trajectory")))?;
            rescale_state(state, spec)
        })
        .collect()
}

/// Below this level `sup |Φ|` is treated as exactly zero.
pub const PHI_CONVERGED: f64 = 1e-14;
/// Minimum `τ̃` spacing between frames used in the decay fit.
pub const MIN_FRAME_SPACING: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PhiDecay {
    /// Every frame has `sup |Φ|` below [`PHI_CONVERGED`].
    Converged,
    Rate {
        slope: f64,
        intercept: f64,
        /// `(τ̃, sup |Φ|)` of the frames in the fit.
        points: Vec<(f64, f64)>,
    },
}

/// `sup |Φ|` over nodes with `|ξ| ≤ k_radius`.
pub fn phi_sup(frame: &RescaledFrame, k_radius: f64) -> f64 {
    sup_inside(&frame.phi, k_radius, |v| v.abs())
}

fn sup_inside(field: &ScalarField, k_radius: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = &field.grid;
    let nt = g.n_theta();
    let mut best = 0.0f64;
    for (i, &rho) in g.rho_nodes().iter().enumerate() {
        if rho > k_radius {
            break;
        }
        for v in &field.values[i * nt..(i + 1) * nt] {
            let x = f(*v);
            best = if x.is_nan() { f64::NAN } else { best.max(x) };
        }
    }
    best
}

/// Least-squares slope of `ln sup |Φ|` against `τ̃`, using frames at least
/// [`MIN_FRAME_SPACING`] apart. Frames already below [`PHI_CONVERGED`] are
/// left out of the fit.
pub fn phi_decay(frames: &[RescaledFrame], k_radius: f64) -> Result<PhiDecay> {
    if frames.len() < 5 {
        return arg(format!("phi_decay needs at least 5 frames, got {}", frames.len()));
    }
    let r = frames[0].phi.grid.r();
    if !(k_radius > 0.0 && k_radius <= 0.9 * r + 1e-12) {
        return arg(format!("K radius {k_radius} must lie in (0, 0.9 r]"));
    }
    let sups: Vec<(f64, f64)> = frames.iter().map(|f| (f.tau_tilde, phi_sup(f, k_radius))).collect();
    if sups.iter().all(|&(_, s)| s < PHI_CONVERGED) {
        return Ok(PhiDecay::Converged);
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for &(tau, s) in &sups {
        if !(s >= PHI_CONVERGED) {
            continue;
        }
        if points.last().is_none_or(|&(last, _)| tau - last >= MIN_FRAME_SPACING - 1e-12) {
            points.push((tau, s));
        }
    }
    if points.len() < 5 {
        return arg(format!(
            "only {} frames are spaced at least {MIN_FRAME_SPACING} apart in rescaled time; 5 are needed",
            points.len()
        ));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(PhiDecay::Rate { slope, intercept: my - slope * mx, points })
}

/// `sup |ũ* + √(1 - |ξ|²)|` over nodes with `|ξ| ≤ k_radius`.
pub fn hyperboloid_distance(frame: &RescaledFrame, k_radius: f64) -> f64 {
    let g = &frame.u_tilde_star.grid;
    let nt = g.n_theta();
    let mut best = 0.0f64;
    for (i, &rho) in g.rho_nodes().iter().enumerate() {
        if rho > k_radius {
            break;
        }
        let w = (1.0 - rho * rho).sqrt();
        for v in &frame.u_tilde_star.values[i * nt..(i + 1) * nt] {
            best = best.max((v + w).abs());
        }
    }
    best
}

/// `ξ_k ∂_l f - ξ_l ∂_k f` with 0-based axes; on the polar grid this is
/// `±∂_θ f`, taken by centred differences along each ring and on the ghost
/// ring.
pub fn angular_derivative(field: &ScalarField, k: usize, l: usize) -> Result<ScalarField> {
    let sign = match (k, l) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => return arg(format!("axes ({k}, {l}) must be (0, 1) or (1, 0) in two dimensions")),
    };
    let g = &field.grid;
    let nt = g.n_theta();
    let at = sign * g.angular_first_coeff();
    let diff = |row: &[f64]| -> Vec<f64> {
        (0..nt).map(|j| (row[(j + 1) % nt] - row[(j + nt - 1) % nt]) * at).collect()
    };
    let values = field.values.chunks(nt).flat_map(diff).collect();
    let ghost = field.ghost.as_deref().map(diff);
    ScalarField::new(g.clone(), values, ghost)
}

/// One failed monitor check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorViolation {
    pub monitor: String,
    pub t: f64,
    /// Signed margin; negative means violated.
    pub margin: f64,
}

/// Outcome of the a priori bound monitors over a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    /// Smallest `F̃` anywhere on the parabolic boundary (initial state and
    /// outermost ring).
    pub f_tilde_boundary_min: f64,
    pub f_tilde_min: f64,
    pub f_tilde_ok: bool,
    /// Smallest `F̂ = 1/F̃` over the run.
    pub f_hat_min: f64,
    pub f_hat_ok: bool,
    /// Largest excess of interior `∂_θ u*` extremes over the parabolic
    /// boundary extremes (negative when strictly inside).
    pub angular_excess: f64,
    pub angular_ok: bool,
    /// Same for the `∂²_θ u*` maximum.
    pub angular2_excess: f64,
    pub angular2_ok: bool,
    /// Largest nodal increment over all steps (negative means monotone).
    pub max_increment: f64,
    pub monotone: bool,
    pub slack: f64,
    pub violations: Vec<MonitorViolation>,
}

impl MonitorReport {
    pub fn all_pass(&self) -> bool {
        self.f_tilde_ok && self.f_hat_ok && self.angular_ok && self.angular2_ok && self.monotone
    }
}

/// Relative slack on the `F̃` lower bound.
pub const F_TILDE_SLACK: f64 = 0.05;
/// Absolute slack, relative to the data scale, for angular extremes.
pub const ANGULAR_SLACK: f64 = 1e-6;

/// Checks the recorded step monitors against their parabolic-boundary bounds.
pub fn monitor_bounds(traj: &Trajectory) -> MonitorReport {
    monitor_records(&traj.initial, &traj.records, traj.problem.u0_star())
}

/// As [`monitor_bounds`] on bare records.
pub fn monitor_records(initial: &StepRecord, records: &[StepRecord], u0: &ScalarField) -> MonitorReport {
    let scale = u0.values.iter().chain(u0.ghost.iter().flatten()).fold(1.0f64, |m, v| m.max(v.abs()));
    let slack = ANGULAR_SLACK * scale;
    let mut violations = Vec::new();

    let f_bdry = records.iter().fold(initial.f_tilde_min.min(initial.f_tilde_outer_min), |m, r| m.min(r.f_tilde_outer_min));
    let mut f_min = initial.f_tilde_min;
    let mut f_hat_min = 1.0 / initial.f_tilde_max;
    for r in records {
        f_min = f_min.min(r.f_tilde_min);
        f_hat_min = f_hat_min.min(1.0 / r.f_tilde_max);
        let margin = r.f_tilde_min - (1.0 - F_TILDE_SLACK) * f_bdry;
        if !(margin >= 0.0) {
            violations.push(MonitorViolation { monitor: "F_tilde_lower".into(), t: r.t, margin });
        }
        if !(1.0 / r.f_tilde_max > 0.0) {
            violations.push(MonitorViolation { monitor: "F_hat_positive".into(), t: r.t, margin: 1.0 / r.f_tilde_max });
        }
    }

    // Running parabolic-boundary extremes: the initial interior plus the
    // ghost ring up to the current time.
    let (mut bmin, mut bmax, mut b2max) = (
        initial.ang_min.min(initial.ang_bdry_min),
        initial.ang_max.max(initial.ang_bdry_max),
        initial.ang2_max.max(initial.ang2_bdry_max),
    );
    let (mut excess, mut excess2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut max_inc = f64::NEG_INFINITY;
    for r in records {
        bmin = bmin.min(r.ang_bdry_min);
        bmax = bmax.max(r.ang_bdry_max);
        b2max = b2max.max(r.ang2_bdry_max);
        let e = (r.ang_max - bmax).max(bmin - r.ang_min);
        excess = excess.max(e);
        if e > slack {
            violations.push(MonitorViolation { monitor: "angular_extreme".into(), t: r.t, margin: slack - e });
        }
        let e2 = r.ang2_max - b2max;
        excess2 = excess2.max(e2);
        if e2 > slack {
            violations.push(MonitorViolation { monitor: "angular2_max".into(), t: r.t, margin: slack - e2 });
        }
        max_inc = max_inc.max(r.max_increment);
        if !(r.max_increment < 0.0) {
            violations.push(MonitorViolation { monitor: "monotone".into(), t: r.t, margin: -r.max_increment });
        }
    }
    MonitorReport {
        f_tilde_boundary_min: f_bdry,
        f_tilde_min: f_min,
        f_tilde_ok: f_min >= (1.0 - F_TILDE_SLACK) * f_bdry,
        f_hat_min,
        f_hat_ok: f_hat_min > 0.0 && f_hat_min.is_finite(),
        angular_excess: excess,
        angular_ok: !(excess > slack),
        angular2_excess: excess2,
        angular2_ok: !(excess2 > slack),
        max_increment: max_inc,
        monotone: records.iter().all(|r| r.max_increment < 0.0),
        slack,
        violations,
    }
}
