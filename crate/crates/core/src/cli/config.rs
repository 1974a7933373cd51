//! Line-oriented `key = value` experiment configuration.

use crate::error::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InitialData {
    /// `u₀ = √(|x|² + c)`.
    Hyperboloid { c: f64 },
    /// `u₀ = √(|x|² + C₀ + (C₁ - C₀)(0.5 + 0.3 e^{-|x - x_c|²}))`.
    SandwichedBump { center: [f64; 2] },
    /// Graph samples on a Cartesian patch.
    SampleFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub alpha: f64,
    pub initial: InitialData,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub r: f64,
    pub t_end: f64,
    pub n_rho: usize,
    pub n_theta: usize,
    pub snapshot_times: Vec<f64>,
    pub frame_times: Vec<f64>,
    pub k_radius: f64,
    pub cfl_safety: f64,
    pub tol_convex: f64,
    pub strictify_eps: f64,
    pub output: PathBuf,
    pub seed: u64,
    pub condition_samples: usize,
    pub boost_velocity: f64,
    pub radial_nodes: usize,
}

const KEYS: &[&str] = &[
    "n",
    "k",
    "beta",
    "alpha",
    "initial",
    "c",
    "center",
    "sample_file",
    "C0",
    "C1",
    "r",
    "T",
    "n_rho",
    "n_theta",
    "snapshot_times",
    "frame_times",
    "K_radius",
    "cfl_safety",
    "tol_convex",
    "strictify_eps",
    "output",
    "seed",
    "condition_samples",
    "boost_velocity",
    "radial_nodes",
];

struct Raw<'a> {
    entries: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Raw<'a> {
    fn get(&self, key: &str) -> Option<(usize, &'a str)> {
        self.entries.iter().find(|e| e.1 == key).map(|e| (e.0, e.2))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> Result<T> {
        match self.get(key) {
            Some((line, v)) => v.parse().map_err(|_| cfg_err(line, key, format!("cannot parse {v:?}"))),
            None => default.ok_or_else(|| cfg_err(0, key, "required key is missing")),
        }
    }

    fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| cfg_err(line, key, format!("cannot parse {v:?}"))),
            None => Ok(None),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| cfg_err(line, key, format!("cannot parse {v:?} as a comma-separated list"))),
            None => Ok(None),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.get(key).map_or(0, |e| e.0)
    }
}

fn cfg_err(line: usize, field: &str, msg: impl Into<String>) -> Error {
    Error::Config { line, field: field.to_string(), msg: msg.into() }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses and validates a configuration; relative file paths resolve
    /// against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| cfg_err(line, content, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(cfg_err(line, k, "unknown key"));
            }
            if entries.iter().any(|e: &(usize, &str, &str)| e.1 == k) {
                return Err(cfg_err(line, k, "duplicate key"));
            }
            entries.push((line, k, v));
        }
        let raw = Raw { entries };

        let n = raw.parse("n", Some(2))?;
        let k = raw.parse("k", Some(0))?;
        let beta = raw.parse("beta", Some(1.0))?;
        let alpha = raw.parse("alpha", Some(1.0))?;
        crate::curvfun::CurvatureSpec::new(n, k, beta, alpha)
            .map_err(|e| cfg_err(raw.line("beta").max(raw.line("k")), "n/k/beta/alpha", e.to_string()))?;

        let c0: Option<f64> = raw.opt("C0")?;
        let c1: Option<f64> = raw.opt("C1")?;
        match (c0, c1) {
            (Some(a), Some(b)) => {
                if !(a > 0.0) {
                    return Err(cfg_err(raw.line("C0"), "C0", format!("C0 = {a} must be positive")));
                }
                if !(a < b) {
                    return Err(cfg_err(raw.line("C0"), "C0", format!("C0 = {a} must be below C1 = {b}")));
                }
            }
            (None, None) => {}
            (Some(_), None) => return Err(cfg_err(raw.line("C0"), "C1", "C0 is set but C1 is missing")),
            (None, Some(_)) => return Err(cfg_err(raw.line("C1"), "C0", "C1 is set but C0 is missing")),
        }

        let kind: String = raw.parse("initial", Some("hyperboloid".to_string()))?;
        let initial = match kind.as_str() {
            "hyperboloid" => {
                let c: f64 = raw.parse("c", Some(1.0))?;
                if !(c > 0.0 && c.is_finite()) {
                    return Err(cfg_err(raw.line("c"), "c", format!("c = {c} must be positive")));
                }
                InitialData::Hyperboloid { c }
            }
            "sandwiched-bump" => {
                if c0.is_none() {
                    return Err(cfg_err(raw.line("initial"), "C0", "sandwiched-bump needs C0 and C1"));
                }
                let center = match raw.list("center")? {
                    None => [0.0, 0.0],
                    Some(v) if v.len() == 2 => [v[0], v[1]],
                    Some(_) => return Err(cfg_err(raw.line("center"), "center", "expected two coordinates")),
                };
                InitialData::SandwichedBump { center }
            }
            "sample-file" => {
                let p: String = raw.parse("sample_file", None)?;
                InitialData::SampleFile { path: base.join(p) }
            }
            other => {
                return Err(cfg_err(
                    raw.line("initial"),
                    "initial",
                    format!("unknown initial data {other:?}; expected hyperboloid, sandwiched-bump or sample-file"),
                ))
            }
        };

        let r: f64 = raw.parse("r", Some(0.9))?;
        if !(r > 0.0 && r < 1.0) {
            return Err(cfg_err(raw.line("r"), "r", format!("r = {r} must lie in (0, 1)")));
        }
        let t_end: f64 = raw.parse("T", Some(1.0))?;
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(cfg_err(raw.line("T"), "T", format!("T = {t_end} must be positive")));
        }
        let n_rho: usize = raw.parse("n_rho", Some(64))?;
        if n_rho < 4 {
            return Err(cfg_err(raw.line("n_rho"), "n_rho", "n_rho must be at least 4"));
        }
        let n_theta: usize = raw.parse("n_theta", Some(128))?;
        if n_theta < 4 || !n_theta.is_multiple_of(2) {
            return Err(cfg_err(raw.line("n_theta"), "n_theta", "n_theta must be even and at least 4"));
        }
        let snapshot_times = raw.list("snapshot_times")?.unwrap_or_else(|| vec![0.0, t_end]);
        check_times(&snapshot_times, t_end, raw.line("snapshot_times"), "snapshot_times")?;
        let frame_times = raw.list("frame_times")?.unwrap_or_default();
        check_times(&frame_times, t_end, raw.line("frame_times"), "frame_times")?;
        let k_radius: f64 = raw.parse("K_radius", Some(0.8 * r))?;
        if !(k_radius > 0.0 && k_radius <= 0.9 * r + 1e-12) {
            return Err(cfg_err(raw.line("K_radius"), "K_radius", "K_radius must lie in (0, 0.9 r]"));
        }
        let cfl_safety: f64 = raw.parse("cfl_safety", Some(0.9))?;
        if !(cfl_safety > 0.0 && cfl_safety < 1.0) {
            return Err(cfg_err(raw.line("cfl_safety"), "cfl_safety", "cfl_safety must lie in (0, 1)"));
        }
        let tol_convex: f64 = raw.parse("tol_convex", Some(1e-12))?;
        if !(tol_convex >= 0.0) {
            return Err(cfg_err(raw.line("tol_convex"), "tol_convex", "tol_convex must be non-negative"));
        }
        let strictify_eps: f64 = raw.parse("strictify_eps", Some(0.0))?;
        if !(0.0..=1.0).contains(&strictify_eps) {
            return Err(cfg_err(raw.line("strictify_eps"), "strictify_eps", "strictify_eps must lie in [0, 1]"));
        }
        let output: String = raw.parse("output", Some("mkflow_out".to_string()))?;
        let boost_velocity: f64 = raw.parse("boost_velocity", Some(0.5))?;
        if !(boost_velocity.abs() <= 0.9) {
            return Err(cfg_err(raw.line("boost_velocity"), "boost_velocity", "|boost_velocity| must be at most 0.9"));
        }
        let condition_samples: usize = raw.parse("condition_samples", Some(200))?;
        if condition_samples == 0 {
            return Err(cfg_err(raw.line("condition_samples"), "condition_samples", "must be positive"));
        }
        let radial_nodes: usize = raw.parse("radial_nodes", Some(4096))?;
        if radial_nodes < 4 {
            return Err(cfg_err(raw.line("radial_nodes"), "radial_nodes", "must be at least 4"));
        }
        Ok(ExperimentConfig {
            n,
            k,
            beta,
            alpha,
            initial,
            c0,
            c1,
            r,
            t_end,
            n_rho,
            n_theta,
            snapshot_times,
            frame_times,
            k_radius,
            cfl_safety,
            tol_convex,
            strictify_eps,
            output: base.join(output),
            seed: raw.parse("seed", Some(0))?,
            condition_samples,
            boost_velocity,
            radial_nodes,
        })
    }

    /// Canonical `key = value` rendering; parsing it reproduces `self`.
    pub fn resolved(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        match &self.initial {
            InitialData::Hyperboloid { c } => {
                let _ = writeln!(s, "initial = hyperboloid");
                let _ = writeln!(s, "c = {c:?}");
            }
            InitialData::SandwichedBump { center } => {
                let _ = writeln!(s, "initial = sandwiched-bump");
                let _ = writeln!(s, "center = {:?}, {:?}", center[0], center[1]);
            }
            InitialData::SampleFile { path } => {
                let _ = writeln!(s, "initial = sample-file");
                let _ = writeln!(s, "sample_file = {}", path.display());
            }
        }
        if let (Some(a), Some(b)) = (self.c0, self.c1) {
            let _ = writeln!(s, "C0 = {a:?}");
            let _ = writeln!(s, "C1 = {b:?}");
        }
        let _ = writeln!(s, "r = {:?}", self.r);
        let _ = writeln!(s, "T = {:?}", self.t_end);
        let _ = writeln!(s, "n_rho = {}", self.n_rho);
        let _ = writeln!(s, "n_theta = {}", self.n_theta);
        let _ = writeln!(s, "snapshot_times = {}", list(&self.snapshot_times));
        if !self.frame_times.is_empty() {
            let _ = writeln!(s, "frame_times = {}", list(&self.frame_times));
        }
        let _ = writeln!(s, "K_radius = {:?}", self.k_radius);
        let _ = writeln!(s, "cfl_safety = {:?}", self.cfl_safety);
        let _ = writeln!(s, "tol_convex = {:?}", self.tol_convex);
        let _ = writeln!(s, "strictify_eps = {:?}", self.strictify_eps);
        let _ = writeln!(s, "output = {}", self.output.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "condition_samples = {}", self.condition_samples);
        let _ = writeln!(s, "boost_velocity = {:?}", self.boost_velocity);
        let _ = writeln!(s, "radial_nodes = {}", self.radial_nodes);
        s
    }

    /// SHA-256 of [`ExperimentConfig::resolved`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.resolved().as_bytes()))
    }

    /// Sorted union of snapshot and frame times.
    pub fn all_output_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.snapshot_times.iter().chain(&self.frame_times).copied().collect();
        t.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
        t.dedup();
        t
    }
}

fn check_times(v: &[f64], t_end: f64, line: usize, field: &str) -> Result<()> {
    if v.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(cfg_err(line, field, "times must be strictly increasing"));
    }
    if v.iter().any(|t| !(0.0..=t_end).contains(t)) {
        return Err(cfg_err(line, field, format!("times must lie in [0, {t_end}]")));
    }
    Ok(())
}
