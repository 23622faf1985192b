//! Exit codes and outputs of the `pplab` binary.

use std::fs;
use std::process::{Command, Output};

fn pplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pplab")).args(args).output().unwrap()
}

fn write_config(dir: &tempfile::TempDir, body: &str) -> String {
    let p = dir.path().join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_scenarios_names_all_nine() {
    let out = pplab(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("gilbert-edges") && text.contains("kr-estimate"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(pplab(&[]).status.code(), Some(1));
    assert_eq!(pplab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pplab(&["verify", "--suite", "nope"]).status.code(), Some(1));
    assert_eq!(pplab(&["run", "--config", "/does/not/exist.json"]).status.code(), Some(1));
    assert_eq!(pplab(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, r#"{"scenario": "gilbert-edges", "t_grid": [10], "replications": 0}"#);
    let out = pplab(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replications"));
    let cfg = write_config(&dir, r#"{"scenario": "nope", "t_grid": [10], "replications": 5000}"#);
    assert_eq!(pplab(&["run", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .env("PPLAB_THREADS", "0")
        .arg("list-scenarios")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"scenario": "gilbert-edges", "d": 2, "t_grid": [20, 40], "replications": 1000, "seed": 5}"#;
    let cfg = write_config(&dir, body);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let out = pplab(&["run", "--config", &cfg, "--output", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .env("PPLAB_THREADS", "2")
        .args(["run", "--config", &cfg, "--output", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,d,t,statistic,distance_name,distance,stderr,bound,bound_form,rate_pred,seed"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn gnuplot_output_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"scenario": "polytope", "d": 3, "t_grid": [20], "replications": 1000, "format": "gnuplot-dat"}"#;
    let cfg = write_config(&dir, body);
    let out = pplab(&["run", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# scenario d t"));
}

#[test]
fn ot_suite_passes() {
    let out = pplab(&["verify", "--suite", "ot"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("pass"));
}

#[test]
fn mecke_suite_passes() {
    let out = pplab(&["verify", "--suite", "mecke"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn violated_threshold_exits_with_two() {
    // Too few replications for the simulator-agreement threshold of 0.02.
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"scenario": "glauber-verify", "t_grid": [5], "replications": 1000, "seed": 1}"#;
    let cfg = write_config(&dir, body);
    let out = pplab(&["run", "--config", &cfg, "--output", dir.path().join("o.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("o.csv").exists());
}
