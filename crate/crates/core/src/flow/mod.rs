//! Explicit integration of the dual flow
//! `u*_t = -f_*(κ*)^{-α} w*` on `B_r` with the moving Dirichlet data
//! `û*₀ - ε S(t) √(1 - r²)`, `S(t) = [(1+α)t + 1]^{1/(1+α)}`.
//!
//! Steps are Heun (explicit trapezoidal) with adaptive `dt`: a step is
//! rejected and retried at half the size whenever an intermediate or final
//! state loses strict convexity.

mod filter;

pub use filter::PoleFilter;

use crate::curvfun::{CurvatureSpec, PlanarLaw};
use crate::dualgeo::{frame_matrix, DualState};
use crate::error::{arg, Error, Result};
use crate::grid::{PolarGrid, ScalarField};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// `0` selects the standard boundary schedule (`ε = 1`); a value in
    /// `(0, 1]` selects the strictified schedule with that `ε`.
    pub strictify_eps: f64,
    pub cfl_safety: f64,
    /// Smallest dual radius accepted at any node.
    pub tol_convex: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { strictify_eps: 0.0, cfl_safety: 0.9, tol_convex: 1e-12 }
    }
}

const MAX_REJECTIONS: usize = 20;
const GROW_AFTER: usize = 10;
const GROW_FACTOR: f64 = 1.2;

/// Per-ring constants of the evaluator.
#[derive(Debug, Clone)]
struct RingConst {
    inv_rho: f64,
    w: f64,
    w2: f64,
    w3: f64,
    /// Largest eigenvalue magnitude of the (filtered) second angular difference.
    ang2: f64,
    /// Largest eigenvalue magnitude of the (filtered) first angular difference.
    ang1: f64,
}

#[derive(Debug, Clone)]
pub struct FlowProblem {
    spec: CurvatureSpec,
    law: PlanarLaw,
    u0_star: ScalarField,
    u0_hat_star: ScalarField,
    t_end: f64,
    strictify_eps: f64,
    eps: f64,
    cfl_safety: f64,
    tol_convex: f64,
    filter: PoleFilter,
    rings: Vec<RingConst>,
    min_kappa0: f64,
    w_r: f64,
}

/// Monitor values of one accepted step (or of the initial state).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub min_kappa_star: f64,
    pub max_kappa_star: f64,
    /// Extremes of `F̃ = f_*(κ*)^α` over all nodes.
    #[serde(rename = "F_tilde_min")]
    pub f_tilde_min: f64,
    #[serde(rename = "F_tilde_max")]
    pub f_tilde_max: f64,
    /// Minimum of `F̃` on the outermost ring.
    #[serde(rename = "F_tilde_outer_min")]
    pub f_tilde_outer_min: f64,
    /// Minimum of the Dirichlet data on the ghost ring.
    pub boundary_value: f64,
    /// Largest (least negative) value of the right-hand side.
    pub max_rhs: f64,
    /// Largest nodal change `u*(t) - u*(t - dt)`.
    pub max_increment: f64,
    /// Interior extremes of `∂_θ u*` and the maximum of `∂²_θ u*`.
    pub ang_min: f64,
    pub ang_max: f64,
    pub ang2_max: f64,
    /// The same quantities on the ghost ring.
    pub ang_bdry_min: f64,
    pub ang_bdry_max: f64,
    pub ang2_bdry_max: f64,
    /// Rejected attempts before this step was accepted.
    pub rejections: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub problem: FlowProblem,
    pub snapshots: Vec<DualState>,
    pub initial: StepRecord,
    pub records: Vec<StepRecord>,
    pub final_state: DualState,
}

/// Evaluation of the right-hand side on one state.
#[derive(Debug, Clone)]
struct Eval {
    rhs: Vec<f64>,
    stats: EvalStats,
}

#[derive(Debug, Clone, Copy)]
struct EvalStats {
    min_kappa: f64,
    worst: (usize, usize),
    max_kappa: f64,
    ft_min: f64,
    ft_max: f64,
    ft_outer_min: f64,
    max_rhs: f64,
    lambda_max: f64,
    non_finite: Option<(usize, usize)>,
}

impl EvalStats {
    fn empty() -> Self {
        EvalStats {
            min_kappa: f64::INFINITY,
            worst: (0, 0),
            max_kappa: f64::NEG_INFINITY,
            ft_min: f64::INFINITY,
            ft_max: f64::NEG_INFINITY,
            ft_outer_min: f64::INFINITY,
            max_rhs: f64::NEG_INFINITY,
            lambda_max: 0.0,
            non_finite: None,
        }
    }

    /// Combines ring statistics in ring order, so ties resolve to the
    /// innermost ring whatever the thread schedule.
    fn merge(mut self, o: EvalStats) -> Self {
        if o.min_kappa < self.min_kappa {
            self.min_kappa = o.min_kappa;
            self.worst = o.worst;
        }
        self.max_kappa = self.max_kappa.max(o.max_kappa);
        self.ft_min = self.ft_min.min(o.ft_min);
        self.ft_max = self.ft_max.max(o.ft_max);
        self.ft_outer_min = self.ft_outer_min.min(o.ft_outer_min);
        self.max_rhs = self.max_rhs.max(o.max_rhs);
        self.lambda_max = self.lambda_max.max(o.lambda_max);
        if self.non_finite.is_none() {
            self.non_finite = o.non_finite;
        }
        self
    }
}

/// `S(t) = [(1+α)t + 1]^{1/(1+α)}`, the scale of the special solution at
/// shifted time `t̃ = t + 1/(1+α)`.
pub fn scale_factor(alpha: f64, t: f64) -> f64 {
    ((1.0 + alpha) * t + 1.0).powf(1.0 / (1.0 + alpha))
}

impl FlowProblem {
    pub fn new(spec: CurvatureSpec, u0_star: ScalarField, t_end: f64, opts: FlowOptions) -> Result<Self> {
        if spec.n() != 2 {
            return arg(format!("the disk solver needs n = 2, got n = {}", spec.n()));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return arg(format!("horizon T = {t_end} must be positive"));
        }
        if !(opts.cfl_safety > 0.0 && opts.cfl_safety < 1.0) {
            return arg(format!("cfl_safety = {} must lie in (0, 1)", opts.cfl_safety));
        }
        if !(opts.strictify_eps >= 0.0 && opts.strictify_eps <= 1.0) {
            return arg(format!("strictify_eps = {} must lie in [0, 1]", opts.strictify_eps));
        }
        if !(opts.tol_convex >= 0.0) {
            return arg("tol_convex must be non-negative");
        }
        let law = PlanarLaw::new(&spec)?;
        let g = u0_star.grid.clone();
        u0_star.ghost_ring()?;
        if let Some(k) = u0_star.values.iter().position(|&v| !(v < 0.0)) {
            return Err(Error::Ingestion(format!(
                "initial dual potential must be negative inside the ball; node ({}, {}) has {}",
                k / g.n_theta(),
                k % g.n_theta(),
                u0_star.values[k]
            )));
        }
        let eps = if opts.strictify_eps == 0.0 { 1.0 } else { opts.strictify_eps };
        let filter = PoleFilter::new(&g);
        let rings = ring_constants(&g, &filter);
        let w_r = (1.0 - g.r() * g.r()).sqrt();
        let u0_hat_star = ScalarField::from_fn(g.clone(), |x| {
            let w = (1.0 - x[0] * x[0] - x[1] * x[1]).sqrt();
            eps * w
        });
        let u0_hat_star = ScalarField {
            grid: g.clone(),
            values: u0_hat_star.values.iter().zip(&u0_star.values).map(|(a, b)| a + b).collect(),
            ghost: Some(
                u0_hat_star.ghost.as_ref().unwrap().iter().zip(u0_star.ghost_ring()?).map(|(a, b)| a + b).collect(),
            ),
        };
        let mut p = FlowProblem {
            spec,
            law,
            u0_star,
            u0_hat_star,
            t_end,
            strictify_eps: opts.strictify_eps,
            eps,
            cfl_safety: opts.cfl_safety,
            tol_convex: opts.tol_convex,
            filter,
            rings,
            min_kappa0: 0.0,
            w_r,
        };
        let e = p.evaluate_raw(&p.u0_star.values, p.u0_star.ghost_ring()?);
        if let Some((ring, angle)) = e.stats.non_finite {
            return Err(Error::Numeric { ring, angle, what: "non-finite initial curvature".into() });
        }
        if !(e.stats.min_kappa > p.tol_convex) {
            return Err(Error::Ingestion(format!(
                "initial dual potential is not strictly convex: min dual radius {:e} at node ({}, {})",
                e.stats.min_kappa, e.stats.worst.0, e.stats.worst.1
            )));
        }
        p.min_kappa0 = e.stats.min_kappa;
        if opts.strictify_eps > 0.0 && !(e.stats.min_kappa - opts.strictify_eps > 0.0) {
            return arg(format!(
                "strictify_eps = {} leaves u*_0 + eps w* non-convex (min dual radius {:.6}); try strictify_eps = {:.6}",
                opts.strictify_eps,
                e.stats.min_kappa,
                p.suggested_eps()
            ));
        }
        Ok(p)
    }

    pub fn spec(&self) -> &CurvatureSpec {
        &self.spec
    }
    pub fn alpha(&self) -> f64 {
        self.spec.alpha()
    }
    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.u0_star.grid
    }
    pub fn r(&self) -> f64 {
        self.grid().r()
    }
    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    pub fn u0_star(&self) -> &ScalarField {
        &self.u0_star
    }
    /// `û*₀ = u*₀ + ε w*`.
    pub fn u0_hat_star(&self) -> &ScalarField {
        &self.u0_hat_star
    }
    pub fn strictify_eps(&self) -> f64 {
        self.strictify_eps
    }
    /// The `ε` multiplying the boundary schedule.
    pub fn effective_eps(&self) -> f64 {
        self.eps
    }
    pub fn cfl_safety(&self) -> f64 {
        self.cfl_safety
    }
    pub fn tol_convex(&self) -> f64 {
        self.tol_convex
    }
    pub fn filter(&self) -> &PoleFilter {
        &self.filter
    }

    /// Minimum dual radius of `û*₀`, i.e. of `u*₀` less `ε`.
    pub fn strict_convexity_margin(&self) -> f64 {
        self.min_kappa0 - self.eps
    }

    /// An `ε` that makes `û*₀` strictly convex with margin.
    pub fn suggested_eps(&self) -> f64 {
        (0.5 * self.min_kappa0).min(1.0)
    }

    /// Dirichlet data on the ghost ring at time `t`.
    pub fn boundary_value(&self, t: f64) -> Vec<f64> {
        let drop = self.eps * (1.0 - scale_factor(self.alpha(), t)) * self.w_r;
        self.u0_star.ghost.as_ref().expect("validated").iter().map(|u| u + drop).collect()
    }

    /// Raw right-hand side `-f_*(κ*)^{-α} w*`; its ghost ring holds the time
    /// derivative of the boundary data.
    pub fn rhs(&self, state: &DualState) -> Result<ScalarField> {
        self.check_grid(state)?;
        let e = self.evaluate(&state.field.values, state.field.ghost_ring()?)?;
        let alpha = self.alpha();
        let db = -self.eps * scale_factor(alpha, state.t).powf(-alpha) * self.w_r;
        ScalarField::new(state.field.grid.clone(), e.rhs, Some(vec![db; self.grid().n_theta()]))
    }

    /// Largest stable step for the current state, capped at `T/100`.
    pub fn stable_dt(&self, state: &DualState) -> Result<f64> {
        self.check_grid(state)?;
        let e = self.evaluate(&state.field.values, state.field.ghost_ring()?)?;
        self.dt_from(&e.stats)
    }

    /// One Heun step of size `dt` from `state`.
    pub fn step(&self, state: &DualState, dt: f64) -> Result<DualState> {
        self.check_grid(state)?;
        if !(dt >= 0.0 && dt.is_finite()) {
            return arg(format!("step size {dt} must be non-negative"));
        }
        let e = self.evaluate(&state.field.values, state.field.ghost_ring()?)?;
        let pk = self.filtered(e.rhs);
        let (next, _, _) = self.heun(state, &pk, dt)?;
        Ok(next)
    }

    pub fn run(&self, snapshot_times: &[f64]) -> Result<Trajectory> {
        self.run_observed(snapshot_times, |_, _| {})
    }

    /// As [`FlowProblem::run`], calling `observer` on every accepted state.
    pub fn run_observed(
        &self,
        snapshot_times: &[f64],
        mut observer: impl FnMut(&DualState, &StepRecord),
    ) -> Result<Trajectory> {
        for w in snapshot_times.windows(2) {
            if !(w[0] < w[1]) {
                return arg("snapshot times must be strictly increasing");
            }
        }
        if let Some(&t) = snapshot_times.iter().find(|&&t| !(0.0..=self.t_end).contains(&t)) {
            return arg(format!("snapshot time {t} outside [0, {}]", self.t_end));
        }
        let mut state = DualState::new(self.u0_star.clone(), 0.0);
        let e0 = self.evaluate(&state.field.values, state.field.ghost_ring()?)?;
        let initial = self.record(&state, None, 0.0, &e0.stats, 0);
        observer(&state, &initial);
        let mut snapshots = Vec::with_capacity(snapshot_times.len());
        let mut next_snap = 0;
        while next_snap < snapshot_times.len() && snapshot_times[next_snap] <= 0.0 {
            snapshots.push(state.clone());
            next_snap += 1;
        }
        let mut dt = self.dt_from(&e0.stats)?;
        let mut pk = self.filtered(e0.rhs);
        let mut records = Vec::new();
        let mut since_growth = 0;
        let mut rejections = 0;
        while state.t < self.t_end {
            let remaining = self.t_end - state.t;
            let mut h = dt.min(remaining);
            // Avoid leaving a sliver at the end.
            if remaining - h < 1e-9 * self.t_end {
                h = remaining;
            }
            match self.heun(&state, &pk, h) {
                Ok((next, e, pk_next)) => {
                    let next = if h == remaining {
                        DualState::new(next.field, self.t_end)
                    } else {
                        next
                    };
                    let rec = self.record(&next, Some(&state), h, &e.stats, rejections);
                    while next_snap < snapshot_times.len() && snapshot_times[next_snap] <= next.t {
                        snapshots.push(self.interpolate(&state, &next, snapshot_times[next_snap]));
                        next_snap += 1;
                    }
                    observer(&next, &rec);
                    records.push(rec);
                    state = next;
                    pk = pk_next;
                    rejections = 0;
                    since_growth += 1;
                    let cap = self.dt_from(&e.stats)?;
                    if since_growth >= GROW_AFTER {
                        dt *= GROW_FACTOR;
                        since_growth = 0;
                    }
                    dt = dt.min(cap);
                }
                Err(Error::Rejected { ring, angle, min_kappa, .. }) => {
                    rejections += 1;
                    since_growth = 0;
                    if rejections >= MAX_REJECTIONS {
                        let cap = self.stable_dt(&state).unwrap_or(f64::NAN);
                        return Err(Error::Aborted {
                            t: state.t,
                            detail: format!(
                                "{MAX_REJECTIONS} consecutive rejections; last dt = {h:e}, stable_dt = {cap:e}, \
                                 min dual radius {min_kappa:e} at node ({ring}, {angle})"
                            ),
                        });
                    }
                    dt = 0.5 * h;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Trajectory { problem: self.clone(), snapshots, initial, records, final_state: state })
    }

    fn check_grid(&self, state: &DualState) -> Result<()> {
        if *state.field.grid != **self.grid() {
            return arg("state grid differs from the problem grid");
        }
        Ok(())
    }

    fn dt_from(&self, s: &EvalStats) -> Result<f64> {
        if !(s.lambda_max.is_finite() && s.lambda_max > 0.0) {
            return Err(Error::Numeric {
                ring: s.worst.0,
                angle: s.worst.1,
                what: format!("diffusion bound {} is not usable", s.lambda_max),
            });
        }
        Ok((self.cfl_safety * 2.0 / s.lambda_max).min(self.t_end / 100.0))
    }

    fn filtered(&self, mut v: Vec<f64>) -> Vec<f64> {
        let nt = self.grid().n_theta();
        let n_f = self.filter.filtered_rings();
        v[..n_f * nt].par_chunks_mut(nt).enumerate().for_each(|(i, ring)| {
            let mut ext = Vec::new();
            self.filter.apply_ring(i, ring, &mut ext);
        });
        v
    }

    /// Heun step given the filtered increment at the start state.
    fn heun(&self, state: &DualState, pk1: &[f64], dt: f64) -> Result<(DualState, Eval, Vec<f64>)> {
        let t1 = state.t + dt;
        let ghost = self.boundary_value(t1);
        let u = &state.field.values;
        let pred: Vec<f64> = u.iter().zip(pk1).map(|(a, k)| a + dt * k).collect();
        let e2 = self.evaluate(&pred, &ghost)?;
        let pk2 = self.filtered(e2.rhs);
        let half = 0.5 * dt;
        let next: Vec<f64> = u.iter().zip(pk1).zip(&pk2).map(|((a, k1), k2)| a + half * (k1 + k2)).collect();
        if let Some(k) = next.iter().position(|v| !v.is_finite()) {
            let nt = self.grid().n_theta();
            return Err(Error::Numeric { ring: k / nt, angle: k % nt, what: "non-finite update".into() });
        }
        let e3 = self.evaluate(&next, &ghost)?;
        let pk3 = self.filtered(e3.rhs.clone());
        let field = ScalarField { grid: state.field.grid.clone(), values: next, ghost: Some(ghost) };
        Ok((DualState::new(field, t1), e3, pk3))
    }

    /// Dense output by linear interpolation; the ghost ring is exact.
    fn interpolate(&self, a: &DualState, b: &DualState, t: f64) -> DualState {
        if t == b.t {
            return b.clone();
        }
        let s = (t - a.t) / (b.t - a.t);
        let values = a.field.values.iter().zip(&b.field.values).map(|(x, y)| x + s * (y - x)).collect();
        let field = ScalarField { grid: a.field.grid.clone(), values, ghost: Some(self.boundary_value(t)) };
        DualState::new(field, t)
    }

    fn record(&self, s: &DualState, prev: Option<&DualState>, dt: f64, e: &EvalStats, rejections: usize) -> StepRecord {
        let g = self.grid();
        let nt = g.n_theta();
        let (at, att) = (g.angular_first_coeff(), g.angular_second_coeff());
        let ang = |row: &[f64], j: usize| {
            let jp = if j + 1 == nt { 0 } else { j + 1 };
            let jm = if j == 0 { nt - 1 } else { j - 1 };
            ((row[jp] - row[jm]) * at, ((row[jp] - row[j]) + (row[jm] - row[j])) * att)
        };
        let (mut amin, mut amax, mut a2max) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for row in s.field.values.chunks(nt) {
            for j in 0..nt {
                let (d1, d2) = ang(row, j);
                amin = amin.min(d1);
                amax = amax.max(d1);
                a2max = a2max.max(d2);
            }
        }
        let ghost = s.field.ghost.as_ref().expect("flow states carry a ghost ring");
        let (mut bmin, mut bmax, mut b2max) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for j in 0..nt {
            let (d1, d2) = ang(ghost, j);
            bmin = bmin.min(d1);
            bmax = bmax.max(d1);
            b2max = b2max.max(d2);
        }
        let max_increment = match prev {
            Some(p) => s
                .field
                .values
                .iter()
                .zip(&p.field.values)
                .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b)),
            None => 0.0,
        };
        StepRecord {
            t: s.t,
            dt,
            min_kappa_star: e.min_kappa,
            max_kappa_star: e.max_kappa,
            f_tilde_min: e.ft_min,
            f_tilde_max: e.ft_max,
            f_tilde_outer_min: e.ft_outer_min,
            boundary_value: ghost.iter().cloned().fold(f64::INFINITY, f64::min),
            max_rhs: e.max_rhs,
            max_increment,
            ang_min: amin,
            ang_max: amax,
            ang2_max: a2max,
            ang_bdry_min: bmin,
            ang_bdry_max: bmax,
            ang2_bdry_max: b2max,
            rejections,
        }
    }

    fn evaluate(&self, u: &[f64], ghost: &[f64]) -> Result<Eval> {
        let e = self.evaluate_raw(u, ghost);
        let s = &e.stats;
        if let Some((ring, angle)) = s.non_finite {
            return Err(Error::Numeric { ring, angle, what: "non-finite dual curvature".into() });
        }
        if !(s.min_kappa > self.tol_convex) {
            return Err(Error::Rejected {
                ring: s.worst.0,
                angle: s.worst.1,
                min_kappa: s.min_kappa,
                tol: self.tol_convex,
            });
        }
        Ok(e)
    }

    fn evaluate_raw(&self, u: &[f64], ghost: &[f64]) -> Eval {
        let g = self.grid();
        let nt = g.n_theta();
        let mut rhs = vec![0.0; g.len()];
        let stats = rhs
            .par_chunks_mut(nt)
            .enumerate()
            .map(|(i, out)| self.eval_ring(i, u, ghost, out))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(EvalStats::empty(), EvalStats::merge);
        Eval { rhs, stats }
    }

    fn eval_ring(&self, i: usize, u: &[f64], ghost: &[f64], out: &mut [f64]) -> EvalStats {
        let g = &**self.grid();
        let rc = &self.rings[i];
        let s1 = g.first_stencil(i);
        let s2 = g.second_stencil(i);
        let g_r = s1.abs_sum();
        let alpha = self.alpha();
        let outer = i + 1 == g.n_rho();
        let mut st = EvalStats::empty();
        for (j, o) in out.iter_mut().enumerate() {
            let m = frame_matrix(g, u, ghost, i, j);
            let (a, b, c) = (m.xx, m.xy, m.yy);
            let s1v = 0.5 * (a + c);
            let half_diff = 0.5 * (a - c);
            let disc = (half_diff * half_diff + b * b).sqrt();
            let kmin = s1v - disc;
            let kmax = s1v + disc;
            if !(kmin.is_finite() && kmax.is_finite()) {
                st.non_finite.get_or_insert((i, j));
                *o = 0.0;
                continue;
            }
            if kmin < st.min_kappa {
                st.min_kappa = kmin;
                st.worst = (i, j);
            }
            st.max_kappa = st.max_kappa.max(kmax);
            let s2v = a * c - b * b;
            if !(kmin > self.tol_convex && s2v > 0.0) {
                *o = 0.0;
                continue;
            }
            let inv = self.law.inverse_speed(s1v, s2v);
            let r = -inv * rc.w;
            *o = r;
            let ft = 1.0 / inv;
            st.ft_min = st.ft_min.min(ft);
            st.ft_max = st.ft_max.max(ft);
            if outer {
                st.ft_outer_min = st.ft_outer_min.min(ft);
            }
            st.max_rhs = st.max_rhs.max(r);

            // Gershgorin bound of the linearised operator at this node.
            let (g1, g2) = self.law.log_partials(s1v, s2v);
            let k = alpha * inv * rc.w;
            let c_rr = k * (0.5 * g1 + g2 * c) * rc.w3;
            let c_tt = k * (0.5 * g1 + g2 * a) * rc.w;
            let c_rt = k * 2.0 * b.abs() * g2 * rc.w2;
            let rm2 = c_rr * s2.m2;
            let rm = c_rr * s2.m + c_tt * s1.m * rc.inv_rho;
            let rp = c_rr * s2.p + c_tt * s1.p * rc.inv_rho;
            let radial = rm2.abs() + rm.abs() + rp.abs() + (rm2 + rm + rp).abs();
            let ir2 = rc.inv_rho * rc.inv_rho;
            let lambda = radial + c_tt * rc.ang2 * ir2 + c_rt * rc.ang1 * (g_r * rc.inv_rho + ir2);
            st.lambda_max = st.lambda_max.max(lambda);
        }
        st
    }
}

fn ring_constants(g: &PolarGrid, f: &PoleFilter) -> Vec<RingConst> {
    let ht = g.h_theta();
    let s_half = (0.5 * ht).sin();
    (0..g.n_rho())
        .map(|i| {
            let rho = g.rho_nodes()[i];
            let w2 = 1.0 - rho * rho;
            let w = w2.sqrt();
            let m = f.cutoff(i);
            let ang2 = ((0.5 * m as f64 * ht).sin() / s_half).powi(2);
            let ang1 = (1..=m).map(|mm| (mm as f64 * ht).sin().abs()).fold(0.0, f64::max) / ht.sin();
            RingConst { inv_rho: 1.0 / rho, w, w2, w3: w * w2, ang2, ang1 }
        })
        .collect()
}
