//! Command-line surface: configuration, experiment execution, snapshot
//! persistence and report emission.

mod config;
mod experiment;
mod snapshot;

pub use config::{ExperimentConfig, InitialData};
pub use experiment::{
    boost_test, build_problem, build_problem_at, check_conditions, convergence_study, exit_code, radial_reference,
    read_sample_patch, run_config, write_study, BarrierReport, BarrierTracker, BoostReport, ExperimentOutcome,
    ExperimentReport, FrameSummary, StudyLevel, StudyReport, EXIT_CONFIG, EXIT_MONITOR, EXIT_NUMERIC, EXIT_OK,
};
pub use snapshot::{decode_snapshot, emit_snapshot, encode_snapshot, load_snapshot};

use crate::error::{Error, Result};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "mkflow", version, about = "Dual-side curvature flow experiments in Minkowski space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding the configured one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Suppress the human-readable summary.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured flow and its diagnostics.
    Run(Common),
    /// Repeat the run on doubled grids and report observed orders.
    Study {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Check the structural conditions of the configured curvature function.
    CheckConditions(Common),
    /// Boost the configured initial graph and check the hyperboloid sandwich.
    BoostTest(Common),
}

/// Runs the experiment in `config_path` and returns the process exit code.
pub fn run_experiment(config_path: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    let res = ExperimentConfig::load(config_path).and_then(|cfg| run_config(&cfg, out));
    match res {
        Ok(o) => {
            if !quiet {
                print_run(&o);
            }
            o.report.exit_code
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("mkflow: {e}");
    exit_code(e)
}

fn print_run(o: &ExperimentOutcome) {
    let r = &o.report;
    println!("config {}", r.config_hash);
    println!("steps {} (rejections {}), t = {}, {:.1} s", r.steps, r.rejections, r.final_t, r.runtime_seconds);
    if let Some(e) = r.special_solution_error {
        println!("special solution max-norm error {e:.3e}");
    }
    match r.suggested_strictify_eps {
        Some(eps) => println!("strict convexity margin {:.3e} (suggested strictify_eps {eps:.3e})", r.strict_convexity_margin),
        None => println!("strict convexity margin {:.3e}", r.strict_convexity_margin),
    }
    let m = &r.monitors;
    println!("F_tilde min {:.4e} (boundary {:.4e}) {}", m.f_tilde_min, m.f_tilde_boundary_min, ok(m.f_tilde_ok));
    println!("F_hat min {:.4e} {}", m.f_hat_min, ok(m.f_hat_ok));
    println!("angular excess {:.3e} / {:.3e} {}", m.angular_excess, m.angular2_excess, ok(m.angular_ok && m.angular2_ok));
    println!("max increment {:.3e} {}", m.max_increment, ok(m.monotone));
    if let Some(b) = &r.barrier {
        println!(
            "barrier margins {:.3e} / {:.3e}, {} violations {}",
            b.min_lower_margin,
            b.min_upper_margin,
            b.violations,
            ok(b.violations == 0)
        );
    }
    if let Some(d) = &r.phi_decay {
        println!("phi decay {d:?}");
    }
    println!("artifacts in {}", o.out_dir.display());
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn study(c: &Common, levels: usize) -> Result<i32> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let rep = convergence_study(&cfg, levels)?;
    let out = c.out.clone().unwrap_or_else(|| cfg.output.clone());
    std::fs::create_dir_all(&out)?;
    write_study(&out.join("study.tsv"), &rep)?;
    if !c.quiet {
        println!("reference: {}", rep.reference);
        for (k, l) in rep.levels.iter().enumerate() {
            let order = if k == 0 { String::new() } else { format!("  order {:.3}", rep.orders[k - 1]) };
            println!("{:>5} x {:<5} error {:.4e}{order}", l.n_rho, l.n_theta, l.error);
        }
    }
    Ok(EXIT_OK)
}

fn conditions(c: &Common) -> Result<i32> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let rep = check_conditions(&cfg)?;
    if !c.quiet {
        println!(
            "samples {}: concave {} positive {} monotone {} homogeneous {} eps0 {} ({:.4e}) escape {} normalized {}",
            rep.sample_count,
            rep.concave,
            rep.positive,
            rep.monotone,
            rep.homogeneous,
            rep.epsilon0_positive,
            rep.epsilon0_estimate,
            rep.escapes,
            rep.normalized
        );
        for f in rep.failures.iter().take(10) {
            println!("  {:?} at {:?}: {}", f.condition, f.sample, f.detail);
        }
    }
    Ok(if rep.all_pass() { EXIT_OK } else { EXIT_MONITOR })
}

fn boost(c: &Common) -> Result<i32> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let rep = boost_test(&cfg)?;
    if !c.quiet {
        println!("velocity {}, {} samples", rep.velocity, rep.samples);
        if let Some(e) = rep.invariance_error {
            println!("hyperboloid invariance error {e:.3e}");
        }
        if let Some(s) = &rep.sandwich {
            println!("sandwich: {} violations, min margin {:.4e}", s.violations, s.min_margin);
        }
    }
    let pass = rep.sandwich.is_none_or(|s| s.violations == 0) && rep.invariance_error.is_none_or(|e| e < 1e-6);
    Ok(if pass { EXIT_OK } else { EXIT_MONITOR })
}

/// Sizes the global worker pool from `MKFLOW_THREADS` when set.
fn configure_threads() {
    if let Some(n) = std::env::var("MKFLOW_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses the command line, executes it, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    configure_threads();
    let res = match &cli.command {
        Command::Run(c) => Ok(run_experiment(&c.config, c.out.as_deref(), c.quiet)),
        Command::Study { common, levels } => study(common, *levels),
        Command::CheckConditions(c) => conditions(c),
        Command::BoostTest(c) => boost(c),
    };
    res.unwrap_or_else(|e| fail(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        let c = Cli::try_parse_from(["mkflow", "study", "--config", "a.cfg", "--levels", "2", "--quiet"]).unwrap();
        match c.command {
            Command::Study { common, levels } => {
                assert_eq!(levels, 2);
                assert!(common.quiet);
                assert_eq!(common.config, PathBuf::from("a.cfg"));
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["mkflow", "run"]).is_err());
        assert!(Cli::try_parse_from(["mkflow", "boost-test", "--config", "x", "--out", "o"]).is_ok());
        assert!(Cli::try_parse_from(["mkflow", "check-conditions", "--config", "x"]).is_ok());
    }

    #[test]
    fn missing_config_exits_two() {
        assert_eq!(main_with_args(["mkflow", "run", "--config", "/nonexistent/x.cfg", "--quiet"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["mkflow", "frobnicate"]), EXIT_CONFIG);
    }
}
