//! The binary's exit codes and output files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnoisegen"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_RING: &str = r#"{"task": "ring_y", "generator": {"n_qubits": 1, "reps": 3}, "train": {"epochs": 4},
    "data": {"count": 30, "train_count": 10}, "generate": {"count": 25}}"#;

#[test]
fn ring_pipeline_writes_documented_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ring.json", SMALL_RING);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    for cmd in ["gen-data", "train", "generate", "eval"] {
        let o = run(&["--config", &cfg, "--out", out_s, cmd]);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next(), Some("epoch,loss,aux_metric,wall_ms"));
    assert_eq!(lines.count(), 4);
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.starts_with("name,value,sample_count\n"));
    assert!(report.contains("mean_sq_y,"));
    let generated = qnoisegen::datasets::load_ensemble(out.join("generated.json")).unwrap();
    assert_eq!(generated.len(), 25);
    let (theta, gen_cfg) = qnoisegen::datasets::load_theta(out.join("theta.json")).unwrap();
    assert_eq!((gen_cfg.n_qubits, gen_cfg.reps, theta.len()), (1, 3, 9));
}

#[test]
fn sweep_writes_header_and_unit_success() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ring.json", SMALL_RING);
    let out = dir.path().join("out");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "sweep-p", "--p-list", "1,2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "P,wasserstein,success_probability");
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.ends_with(",1")));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let bad = write_config(dir.path(), "bad.json", r#"{"task": "ring_y", "train": {"lr": 0}}"#);
    let good = write_config(dir.path(), "good.json", SMALL_RING);
    for args in [
        vec!["--config", bad.as_str(), "gen-data"],
        vec!["--config", good.as_str(), "--task", "ring_y", "gen-data"],
        vec!["--task", "ring_w", "gen-data"],
        vec!["--config", good.as_str(), "--out", out_s, "train"],
        vec!["--config", good.as_str(), "--out", out_s, "generate", "--category", "1"],
        vec!["--task", "entropy_series", "--out", out_s, "gen-data"],
        vec!["--config", good.as_str(), "--out", out_s, "eval", "--metrics", "nonsense"],
        vec!["no-such-command"],
    ] {
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = write_config(dir.path(), "ring.json", SMALL_RING);
    let o = run(&["--config", &cfg, "--out", blocker.join("sub").to_str().unwrap(), "gen-data"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn gradcheck_passes_and_fails_on_injected_sign_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let ok = run(&["--out", out_s, "gradcheck"]);
    assert_eq!(code(&ok), 0);
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 6, "{stdout}");
    assert!(out.join("gradcheck.json").is_file());
    let bad = run(&["--out", out_s, "gradcheck", "--inject-wrong-sign"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn divergence_guard_exits_with_three_and_keeps_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let cfg = write_config(
        dir.path(),
        "wild.json",
        r#"{"task": "ring_y", "generator": {"n_qubits": 1, "reps": 3},
            "train": {"epochs": 60, "lr": 5.0, "divergence_factor": 1.0, "divergence_window": 1},
            "data": {"count": 30, "train_count": 10}}"#,
    );
    assert_eq!(code(&run(&["--config", &cfg, "--out", out_s, "gen-data"])), 0);
    let o = run(&["--config", &cfg, "--out", out_s, "train"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.lines().count() >= 2);
    assert!(!out.join("theta.json").exists());
}
