//! Experiment execution: ingestion, the flow run, diagnostics, and
//! artifact files.

use super::config::{ExperimentConfig, InitialData};
use super::snapshot::emit_snapshot;
use crate::curvfun::{check_structural_conditions, log_uniform_samples, ConditionOptions, ConditionReport, CurvatureSpec};
use crate::diag::{
    check_sandwich, hyperboloid_distance, lorentz_boost, monitor_bounds, phi_decay, phi_sup, rescale, MonitorReport,
    PhiDecay, SandwichReport,
};
use crate::dualgeo::{legendre_primal_to_dual, w_star, CartesianPatch};
use crate::error::{arg, Error, Result};
use crate::flow::{scale_factor, FlowOptions, FlowProblem, StepRecord, Trajectory};
use crate::grid::{build_grid, ScalarField};
use crate::initial::{ingest, ingest_radial, Hyperboloid, PrimalGraph, SandwichedBump};
use crate::oracles::{barrier_pair, radial_run, BarrierPair, RadialOptions, RadialProfile};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_MONITOR: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit code for an error that ends an experiment.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric { .. } | Error::Aborted { .. } | Error::Rejected { .. } | Error::DomainBoundary { .. } => {
            EXIT_NUMERIC
        }
        Error::BarrierConstruction { .. } => EXIT_MONITOR,
        _ => EXIT_CONFIG,
    }
}

pub fn spec_of(cfg: &ExperimentConfig) -> Result<CurvatureSpec> {
    CurvatureSpec::new(cfg.n, cfg.k, cfg.beta, cfg.alpha)
}

/// The builtin initial graph, or `None` for sampled data.
pub fn builtin_graph(cfg: &ExperimentConfig) -> Option<Box<dyn PrimalGraph>> {
    match &cfg.initial {
        InitialData::Hyperboloid { c } => Some(Box::new(Hyperboloid { c: *c })),
        InitialData::SandwichedBump { center } => Some(Box::new(
            SandwichedBump::new(cfg.c0.expect("validated"), cfg.c1.expect("validated")).with_center(*center),
        )),
        InitialData::SampleFile { .. } => None,
    }
}

/// Reads a sample file: a header line `nx ny h x0 y0` followed by `nx·ny`
/// heights, row-major in `y`. `#` starts a comment.
pub fn read_sample_patch(path: &Path) -> Result<CartesianPatch> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut toks = text.lines().flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace());
    let mut next = |what: &str| -> Result<&str> {
        toks.next().ok_or_else(|| Error::Ingestion(format!("sample file ends before {what}")))
    };
    let bad = |what: &str| Error::Ingestion(format!("sample file: cannot parse {what}"));
    let nx: usize = next("nx")?.parse().map_err(|_| bad("nx"))?;
    let ny: usize = next("ny")?.parse().map_err(|_| bad("ny"))?;
    let h: f64 = next("h")?.parse().map_err(|_| bad("h"))?;
    let x0: f64 = next("x0")?.parse().map_err(|_| bad("x0"))?;
    let y0: f64 = next("y0")?.parse().map_err(|_| bad("y0"))?;
    let mut values = Vec::with_capacity(nx * ny);
    for k in 0..nx * ny {
        values.push(next("all heights")?.parse::<f64>().map_err(|_| bad(&format!("height {k}")))?);
    }
    if !(h > 0.0) || nx < 2 || ny < 2 {
        return Err(Error::Ingestion("sample file needs h > 0 and at least 2 × 2 samples".into()));
    }
    Ok(CartesianPatch { origin: [x0, y0], h, nx, ny, values })
}

/// Builds the validated flow problem described by `cfg`.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<FlowProblem> {
    build_problem_at(cfg, cfg.n_rho, cfg.n_theta)
}

pub fn build_problem_at(cfg: &ExperimentConfig, n_rho: usize, n_theta: usize) -> Result<FlowProblem> {
    let spec = spec_of(cfg)?;
    let grid = build_grid(cfg.r, n_rho, n_theta)?;
    let u0 = match (&cfg.initial, builtin_graph(cfg)) {
        (_, Some(g)) => ingest(g.as_ref(), grid)?,
        (InitialData::SampleFile { path }, None) => legendre_primal_to_dual(&read_sample_patch(path)?, grid)?,
        _ => unreachable!("builtin graphs are handled above"),
    };
    let opts = FlowOptions { strictify_eps: cfg.strictify_eps, cfl_safety: cfg.cfl_safety, tol_convex: cfg.tol_convex };
    FlowProblem::new(spec, u0, cfg.t_end, opts)
}

/// Node-wise check of `u_b < u* < u_s` along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierReport {
    pub a0: f64,
    pub a1: f64,
    /// Smallest `u* - u_b` over all nodes and recorded states.
    pub min_lower_margin: f64,
    /// Smallest `u_s - u*`.
    pub min_upper_margin: f64,
    pub violations: usize,
    pub states_checked: usize,
}

/// Accumulates [`BarrierReport`] over states.
#[derive(Debug, Clone)]
pub struct BarrierTracker {
    pair: BarrierPair,
    w: Vec<f64>,
    report: BarrierReport,
}

impl BarrierTracker {
    pub fn new(pair: BarrierPair, problem: &FlowProblem) -> Self {
        let g = problem.grid();
        let w = (0..g.len()).map(|k| w_star(g.xi(k / g.n_theta(), k % g.n_theta()))).collect();
        BarrierTracker {
            pair,
            w,
            report: BarrierReport {
                a0: pair.a0,
                a1: pair.a1,
                min_lower_margin: f64::INFINITY,
                min_upper_margin: f64::INFINITY,
                violations: 0,
                states_checked: 0,
            },
        }
    }

    pub fn observe(&mut self, u: &ScalarField, t: f64) {
        let s = scale_factor(self.pair.alpha, t);
        let lo = -(self.pair.a1 + 1.0) * s;
        let hi = -self.pair.a0 * s;
        let rep = &mut self.report;
        for (v, w) in u.values.iter().zip(&self.w) {
            let ml = v - lo * w;
            let mu = hi * w - v;
            if !(ml > 0.0 && mu > 0.0) {
                rep.violations += 1;
            }
            rep.min_lower_margin = rep.min_lower_margin.min(ml);
            rep.min_upper_margin = rep.min_upper_margin.min(mu);
        }
        rep.states_checked += 1;
    }

    pub fn report(&self) -> BarrierReport {
        self.report
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameSummary {
    pub t: f64,
    pub tau_tilde: f64,
    pub phi_sup: f64,
    pub hyperboloid_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub resolved_config: String,
    pub exit_code: i32,
    pub steps: usize,
    pub rejections: usize,
    pub final_t: f64,
    pub runtime_seconds: f64,
    pub strict_convexity_margin: f64,
    /// Present when `u*₀ + w*` is not strictly convex.
    pub suggested_strictify_eps: Option<f64>,
    /// Max-norm error against the expanding hyperboloid, for the unit
    /// hyperboloid with the standard boundary schedule.
    pub special_solution_error: Option<f64>,
    pub structural_conditions_pass: bool,
    pub monitors: MonitorReport,
    pub barrier: Option<BarrierReport>,
    pub frames: Vec<FrameSummary>,
    pub phi_decay: Option<PhiDecay>,
    pub all_pass: bool,
}

pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub trajectory: Trajectory,
    pub out_dir: PathBuf,
}

fn io<T>(r: std::io::Result<T>, p: &Path) -> Result<T> {
    r.map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

/// Runs the experiment described by `cfg`, writing artifacts to `out`
/// (the configured output directory when `None`).
pub fn run_config(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.clone());
    io(std::fs::create_dir_all(out_dir.join("snapshots")), &out_dir)?;
    io(std::fs::write(out_dir.join("config.cfg"), cfg.resolved()), &out_dir)?;

    let spec = spec_of(cfg)?;
    let conditions = structural_report(cfg)?;
    let problem = build_problem(cfg)?;
    let mut barrier = match (cfg.c0, cfg.c1) {
        (Some(c0), Some(c1)) => Some(BarrierTracker::new(barrier_pair(c0, c1, cfg.alpha)?, &problem)),
        _ => None,
    };
    let times = cfg.all_output_times();
    let traj = problem.run_observed(&times, |s, _| {
        if let Some(b) = barrier.as_mut() {
            b.observe(&s.field, s.t);
        }
    })?;

    for (k, s) in traj.snapshots.iter().enumerate() {
        emit_snapshot(s, &out_dir.join("snapshots").join(format!("snap_{k:04}.mkf")))?;
    }
    write_steps(&out_dir.join("steps.tsv"), &traj.initial, &traj.records)?;

    let monitors = monitor_bounds(&traj);
    let frames = rescale(&traj, &cfg.frame_times)?;
    let frame_rows: Vec<FrameSummary> = frames
        .iter()
        .map(|f| FrameSummary {
            t: f.t,
            tau_tilde: f.tau_tilde,
            phi_sup: phi_sup(f, cfg.k_radius),
            hyperboloid_distance: hyperboloid_distance(f, cfg.k_radius),
        })
        .collect();
    let decay = if frames.len() >= 5 { phi_decay(&frames, cfg.k_radius).ok() } else { None };
    let special = match cfg.initial {
        InitialData::Hyperboloid { c } if c == 1.0 && problem.effective_eps() == 1.0 => {
            let s = scale_factor(spec.alpha(), traj.final_state.t);
            let exact = ScalarField::from_fn(problem.grid().clone(), |x| -s * w_star(x));
            Some(traj.final_state.field.max_abs_diff(&exact))
        }
        _ => None,
    };
    let barrier = barrier.map(|b| b.report());
    let margin = problem.strict_convexity_margin();
    let all_pass = monitors.all_pass() && barrier.is_none_or(|b| b.violations == 0);
    let report = ExperimentReport {
        config_hash: cfg.hash(),
        resolved_config: cfg.resolved(),
        exit_code: if all_pass { EXIT_OK } else { EXIT_MONITOR },
        steps: traj.records.len(),
        rejections: traj.records.iter().map(|r| r.rejections).sum(),
        final_t: traj.final_state.t,
        runtime_seconds: started.elapsed().as_secs_f64(),
        strict_convexity_margin: margin,
        suggested_strictify_eps: (margin <= 0.0).then(|| problem.suggested_eps()),
        special_solution_error: special,
        structural_conditions_pass: conditions.all_pass(),
        monitors,
        barrier,
        frames: frame_rows,
        phi_decay: decay,
        all_pass,
    };
    write_monitor_tables(&out_dir.join("monitors.txt"), &report)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    io(std::fs::write(out_dir.join("summary.json"), json), &out_dir)?;
    Ok(ExperimentOutcome { report, trajectory: traj, out_dir })
}

fn structural_report(cfg: &ExperimentConfig) -> Result<ConditionReport> {
    let spec = spec_of(cfg)?;
    let samples = log_uniform_samples(spec.n(), cfg.condition_samples, 1e-2, 1e2, cfg.seed);
    check_structural_conditions(&spec, &samples, &ConditionOptions::default())
}

const STEP_COLUMNS: &str = "t\tdt\tmin_kappa_star\tmax_kappa_star\tF_tilde_min\tF_tilde_max\tF_tilde_outer_min\t\
boundary_value\tmax_rhs\tmax_increment\tang_min\tang_max\tang2_max\tang_bdry_min\tang_bdry_max\tang2_bdry_max\trejections";

fn write_steps(path: &Path, initial: &StepRecord, records: &[StepRecord]) -> Result<()> {
    let mut s = String::with_capacity(200 * (records.len() + 2));
    s.push_str(STEP_COLUMNS);
    s.push('\n');
    for r in std::iter::once(initial).chain(records) {
        let _ = writeln!(
            s,
            "{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{}",
            r.t,
            r.dt,
            r.min_kappa_star,
            r.max_kappa_star,
            r.f_tilde_min,
            r.f_tilde_max,
            r.f_tilde_outer_min,
            r.boundary_value,
            r.max_rhs,
            r.max_increment,
            r.ang_min,
            r.ang_max,
            r.ang2_max,
            r.ang_bdry_min,
            r.ang_bdry_max,
            r.ang2_bdry_max,
            r.rejections
        );
    }
    io(std::fs::write(path, s), path)
}

fn write_monitor_tables(path: &Path, r: &ExperimentReport) -> Result<()> {
    let m = &r.monitors;
    let mut s = String::new();
    let _ = writeln!(s, "# config {}", r.config_hash);
    let _ = writeln!(s, "\n[F_tilde]\nboundary_min\tmin\tok");
    let _ = writeln!(s, "{:e}\t{:e}\t{}", m.f_tilde_boundary_min, m.f_tilde_min, m.f_tilde_ok);
    let _ = writeln!(s, "\n[F_hat]\nmin\tok");
    let _ = writeln!(s, "{:e}\t{}", m.f_hat_min, m.f_hat_ok);
    let _ = writeln!(s, "\n[angular]\nexcess\texcess_second\tslack\tok\tok_second");
    let _ = writeln!(s, "{:e}\t{:e}\t{:e}\t{}\t{}", m.angular_excess, m.angular2_excess, m.slack, m.angular_ok, m.angular2_ok);
    let _ = writeln!(s, "\n[monotone]\nmax_increment\tok");
    let _ = writeln!(s, "{:e}\t{}", m.max_increment, m.monotone);
    if let Some(b) = &r.barrier {
        let _ = writeln!(s, "\n[barrier]\na0\ta1\tmin_lower_margin\tmin_upper_margin\tviolations\tstates");
        let _ = writeln!(
            s,
            "{:e}\t{:e}\t{:e}\t{:e}\t{}\t{}",
            b.a0, b.a1, b.min_lower_margin, b.min_upper_margin, b.violations, b.states_checked
        );
    }
    if !r.frames.is_empty() {
        let _ = writeln!(s, "\n[frames]\nt\ttau_tilde\tphi_sup\thyperboloid_distance");
        for f in &r.frames {
            let _ = writeln!(s, "{:e}\t{:e}\t{:e}\t{:e}", f.t, f.tau_tilde, f.phi_sup, f.hyperboloid_distance);
        }
    }
    if let Some(PhiDecay::Rate { slope, .. }) = &r.phi_decay {
        let _ = writeln!(s, "\n[phi_decay]\nslope\n{slope:e}");
    }
    if !m.violations.is_empty() {
        let _ = writeln!(s, "\n[violations]\nmonitor\tt\tmargin");
        for v in &m.violations {
            let _ = writeln!(s, "{}\t{:e}\t{:e}", v.monitor, v.t, v.margin);
        }
    }
    io(std::fs::write(path, s), path)
}

/// One level of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct StudyLevel {
    pub n_rho: usize,
    pub n_theta: usize,
    pub error: f64,
    pub steps: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub reference: String,
    pub levels: Vec<StudyLevel>,
    /// `log₂(e_ℓ / e_{ℓ+1})` for consecutive levels.
    pub orders: Vec<f64>,
}

enum Reference {
    Exact(f64),
    Radial(RadialProfile),
}

/// Runs the configured experiment at `levels` doubled resolutions starting
/// from the configured grid and reports final-time max-norm errors.
pub fn convergence_study(cfg: &ExperimentConfig, levels: usize) -> Result<StudyReport> {
    if !(2..=4).contains(&levels) {
        return arg(format!("levels = {levels} must lie in [2, 4]"));
    }
    let spec = spec_of(cfg)?;
    let base = build_problem(cfg)?;
    let eps = base.effective_eps();
    let reference = match (&cfg.initial, builtin_graph(cfg)) {
        (InitialData::Hyperboloid { c }, _) if *c == 1.0 && eps == 1.0 => {
            Reference::Exact(scale_factor(spec.alpha(), cfg.t_end))
        }
        (_, Some(g)) if g.is_radial() => {
            let profile = radial_reference(g.as_ref(), &spec, cfg.r, cfg.t_end, cfg.radial_nodes, eps)?;
            Reference::Radial(profile)
        }
        _ => return arg("convergence study needs the unit hyperboloid or radial initial data"),
    };
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let (nr, nt) = (cfg.n_rho << l, cfg.n_theta << l);
        let started = Instant::now();
        let p = if l == 0 { base.clone() } else { build_problem_at(cfg, nr, nt)? };
        let tr = p.run(&[cfg.t_end])?;
        let g = p.grid();
        let fin = &tr.final_state.field;
        let mut err = 0.0f64;
        for i in 0..g.n_rho() {
            let rho = g.rho_nodes()[i];
            let exact = match &reference {
                Reference::Exact(s) => -s * (1.0 - rho * rho).sqrt(),
                Reference::Radial(prof) => prof.value_at(rho)?,
            };
            for j in 0..g.n_theta() {
                err = err.max((fin.at(i, j) - exact).abs());
            }
        }
        out.push(StudyLevel { n_rho: nr, n_theta: nt, error: err, steps: tr.records.len(), seconds: started.elapsed().as_secs_f64() });
    }
    let orders = out.windows(2).map(|w| (w[0].error / w[1].error).log2()).collect();
    let reference = match reference {
        Reference::Exact(_) => "special solution".to_string(),
        Reference::Radial(_) => format!("radial solver, {} nodes", cfg.radial_nodes),
    };
    Ok(StudyReport { reference, levels: out, orders })
}

/// High-resolution radial solution at `t_end` for a radial graph.
pub fn radial_reference(
    graph: &dyn PrimalGraph,
    spec: &CurvatureSpec,
    r: f64,
    t_end: f64,
    nodes: usize,
    eps: f64,
) -> Result<RadialProfile> {
    let radii: Vec<f64> = (0..nodes).map(|i| (i as f64 + 0.5) * r / nodes as f64).collect();
    let values = ingest_radial(graph, &radii)?;
    let boundary = ingest_radial(graph, &[r])?[0];
    let u0 = RadialProfile::from_values(r, spec.n(), values, boundary)?;
    let tr = radial_run(spec, &u0, t_end, &[], RadialOptions { eps, ..Default::default() })?;
    Ok(tr.final_profile)
}

pub fn write_study(path: &Path, r: &StudyReport) -> Result<()> {
    let mut s = format!("# reference: {}\nn_rho\tn_theta\terror\tsteps\tseconds\torder\n", r.reference);
    for (k, l) in r.levels.iter().enumerate() {
        let order = if k == 0 { "-".to_string() } else { format!("{:.3}", r.orders[k - 1]) };
        let _ = writeln!(s, "{}\t{}\t{:e}\t{}\t{:.2}\t{}", l.n_rho, l.n_theta, l.error, l.steps, l.seconds, order);
    }
    io(std::fs::write(path, s), path)
}

/// Structural conditions for the configured curvature function.
pub fn check_conditions(cfg: &ExperimentConfig) -> Result<ConditionReport> {
    structural_report(cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoostReport {
    pub velocity: f64,
    pub samples: usize,
    /// Max deviation of the boosted graph from the original graph function,
    /// meaningful for hyperboloids, which are boost invariant.
    pub invariance_error: Option<f64>,
    pub sandwich: Option<SandwichReport>,
}

/// Boosts samples of the configured initial graph on `[-2, 2]²` and checks
/// the hyperboloid sandwich on the result.
pub fn boost_test(cfg: &ExperimentConfig) -> Result<BoostReport> {
    let patch = match builtin_graph(cfg) {
        Some(g) => CartesianPatch::sample(2.0, 0.05, |x| g.value(x)),
        None => match &cfg.initial {
            InitialData::SampleFile { path } => read_sample_patch(path)?,
            _ => unreachable!("builtin graphs are handled above"),
        },
    };
    let boosted = lorentz_boost(&patch, cfg.boost_velocity)?;
    let p = &boosted.patch;
    let invariance_error = match cfg.initial {
        InitialData::Hyperboloid { c } => {
            let g = Hyperboloid { c };
            let mut worst = 0.0f64;
            for iy in 0..p.ny {
                for ix in 0..p.nx {
                    worst = worst.max((p.at(ix, iy) - g.value(p.point(ix, iy))).abs());
                }
            }
            Some(worst)
        }
        _ => None,
    };
    let sandwich = match (cfg.c0, cfg.c1) {
        (Some(c0), Some(c1)) => Some(check_sandwich(p, c0, c1)),
        _ => None,
    };
    Ok(BoostReport { velocity: cfg.boost_velocity, samples: p.nx * p.ny, invariance_error, sandwich })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text, Path::new("/tmp")).unwrap()
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config { line: 1, field: "C0".into(), msg: String::new() }), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Aborted { t: 0.0, detail: String::new() }), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::Ingestion(String::new())), EXIT_CONFIG);
    }

    #[test]
    fn small_special_run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("n_rho = 8\nn_theta = 16\nT = 0.1\nsnapshot_times = 0, 0.05, 0.1\n");
        let out = run_config(&c, Some(dir.path())).unwrap();
        assert_eq!(out.report.exit_code, EXIT_OK);
        let err = out.report.special_solution_error.unwrap();
        assert!(err < 5e-3, "{err:e}");
        for f in ["config.cfg", "steps.tsv", "summary.json", "monitors.txt", "snapshots/snap_0002.mkf"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(json["config_hash"], c.hash());
    }

    #[test]
    fn study_levels_validated() {
        let c = cfg("n_rho = 8\nn_theta = 16\nT = 0.01\n");
        assert!(convergence_study(&c, 1).is_err());
        assert!(convergence_study(&c, 5).is_err());
        let bump = cfg("initial = sandwiched-bump\nC0 = 0.5\nC1 = 2\ncenter = 0.2, 0\nn_rho = 8\nn_theta = 16\n");
        assert!(convergence_study(&bump, 2).is_err());
    }

    #[test]
    fn boost_of_hyperboloid() {
        let c = cfg("c = 2\nC0 = 1\nC1 = 3\nboost_velocity = 0.5\n");
        let r = boost_test(&c).unwrap();
        assert!(r.invariance_error.unwrap() < 1e-6);
        assert_eq!(r.sandwich.unwrap().violations, 0);
    }

    #[test]
    fn sample_file_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.txt");
        let h = 0.02;
        let n = 201;
        let mut s = format!("{n} {n} {h} -2 -2\n");
        for iy in 0..n {
            for ix in 0..n {
                let x = [-2.0 + ix as f64 * h, -2.0 + iy as f64 * h];
                let _ = write!(s, "{} ", (x[0] * x[0] + x[1] * x[1] + 1.0).sqrt());
            }
            s.push('\n');
        }
        std::fs::write(&p, s).unwrap();
        let patch = read_sample_patch(&p).unwrap();
        assert_eq!((patch.nx, patch.ny), (n, n));
        let c = ExperimentConfig::parse("initial = sample-file\nsample_file = u.txt\nr = 0.5\nn_rho = 4\nn_theta = 8\n", dir.path())
            .unwrap();
        let prob = build_problem(&c).unwrap();
        let exact = ScalarField::from_fn(prob.grid().clone(), |x| -w_star(x));
        assert!(prob.u0_star().max_abs_diff(&exact) < 5e-3);
    }
}
