use mkflow::cli::{load_snapshot, ExperimentConfig, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK};
use std::path::Path;
use std::process::{Command, Output};

fn mkflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mkflow")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "initial = hyperboloid\nc = 1\nn_rho = 8\nn_theta = 16\nT = 0.2\nsnapshot_times = 0, 0.1, 0.2\n";

#[test]
fn small_special_run_exits_zero_and_reports_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", SMALL);
    let out_dir = dir.path().join("out");
    let o = mkflow(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("special solution max-norm error"), "{stdout}");
    for f in ["config.cfg", "steps.tsv", "monitors.txt", "summary.json", "snapshots/snap_0000.mkf"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
    let snap = load_snapshot(&out_dir.join("snapshots/snap_0002.mkf")).unwrap();
    assert_eq!(snap.t, 0.2);
    assert_eq!(snap.grid().n_rho(), 8);
}

#[test]
fn quiet_suppresses_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", SMALL);
    let o = mkflow(&["run", "--quiet", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(o.stdout.is_empty());
}

#[test]
fn ordered_sandwich_constants_are_required() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "initial = sandwiched-bump\nC0 = 2\nC1 = 0.5\n");
    let o = mkflow(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("`C0`") && stderr.contains("line 2"), "{stderr}");
}

#[test]
fn unknown_key_and_missing_file_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.cfg", "n_rhoo = 8\n");
    assert_eq!(mkflow(&["run", "--config", &cfg]).status.code(), Some(EXIT_CONFIG));
    assert_eq!(mkflow(&["run", "--config", "/nonexistent.cfg"]).status.code(), Some(EXIT_CONFIG));
    assert_eq!(mkflow(&["study", "--config", &cfg, "--levels", "1"]).status.code(), Some(EXIT_CONFIG));
}

#[test]
fn study_rejects_single_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", SMALL);
    let o = mkflow(&["study", "--config", &cfg, "--levels", "1"]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("levels"));
}

#[test]
fn aggressive_cfl_either_runs_or_names_stable_dt() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "fast.cfg",
        "initial = sandwiched-bump\nC0 = 0.5\nC1 = 2\ncenter = 0.3, 0.1\nn_rho = 8\nn_theta = 16\nT = 0.5\ncfl_safety = 0.99\n",
    );
    let o = mkflow(&["run", "--quiet", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    match o.status.code() {
        Some(EXIT_OK) => {}
        Some(EXIT_NUMERIC) => assert!(String::from_utf8_lossy(&o.stderr).contains("stable_dt")),
        other => panic!("unexpected exit {other:?}: {}", String::from_utf8_lossy(&o.stderr)),
    }
}

#[test]
fn identical_configs_give_identical_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.cfg",
        "initial = sandwiched-bump\nC0 = 0.5\nC1 = 2\ncenter = 0.3, 0.1\nn_rho = 8\nn_theta = 16\nT = 0.3\nsnapshot_times = 0.1, 0.3\n",
    );
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = mkflow(&["run", "--quiet", "--config", &cfg, "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
            out
        })
        .collect();
    for f in ["snapshots/snap_0000.mkf", "snapshots/snap_0001.mkf", "steps.tsv", "config.cfg"] {
        assert_eq!(std::fs::read(runs[0].join(f)).unwrap(), std::fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
}

#[test]
fn embedded_config_reproduces_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", SMALL);
    let out = dir.path().join("o");
    assert_eq!(mkflow(&["run", "--quiet", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let resolved = ExperimentConfig::load(&out.join("config.cfg")).unwrap();
    assert_eq!(summary["config_hash"].as_str().unwrap(), resolved.hash());
    assert_eq!(summary["resolved_config"].as_str().unwrap(), resolved.resolved());
}

#[test]
fn bundled_boost_config_passes() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/boost.cfg");
    let o = mkflow(&["boost-test", "--config", cfg]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 violations"));
}

#[test]
fn bundled_condition_config_passes() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/conditions_k1.cfg");
    let o = mkflow(&["check-conditions", "--config", cfg]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn worker_count_hint_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", SMALL);
    let mut outs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_mkflow"))
            .env("MKFLOW_THREADS", threads)
            .args(["run", "--quiet", "--config", &cfg, "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(EXIT_OK));
        outs.push(std::fs::read(out.join("snapshots/snap_0002.mkf")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}
