//! End-to-end behaviour of the binary: exit codes, report files, CSV dumps.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_jetcartan")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

#[test]
fn missing_config_exits_with_usage_error() {
    let status = Command::new(bin())
        .args(["construct", "--config", "/nonexistent/nope.toml"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn malformed_potential_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "dimension = 1\npotential = \"((\"\n").unwrap();
    let out = Command::new(bin())
        .args(["construct", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("syntax error"), "stderr: {}", stderr);
}

#[test]
fn unknown_subcommand_exits_with_usage_error() {
    let out = Command::new(bin()).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn construct_writes_report_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = Command::new(bin())
        .args(["construct", "--config"])
        .arg(config("schrodinger_1d.toml"))
        .args(["--seed", "3", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["command"], "construct");
    assert_eq!(json["all_checks_pass"], true);
    assert_eq!(json["dimension"], 1);
}

#[test]
fn diffusion_flag_switches_the_time_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = Command::new(bin())
        .args(["construct", "--config"])
        .arg(config("schrodinger_1d.toml"))
        .args(["--diffusion", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["time_coefficient"], "1");
    // the connection alpha_t loses the imaginary factor
    let alpha_t = json["gauge_choice"]["alpha_t"]["infix"].as_str().unwrap();
    assert!(!alpha_t.contains('I'), "alpha_t = {}", alpha_t);
}

#[test]
fn gauge_and_verify_torsion_commands_run() {
    for cmd in ["gauge", "verify-torsion"] {
        let out = Command::new(bin())
            .args([cmd, "--config"])
            .arg(config("schrodinger_1d.toml"))
            .args(["--lambda", "1"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "command {}", cmd);
        let stdout = String::from_utf8_lossy(&out.stdout);
        let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(json["command"], cmd);
    }
}

#[test]
fn report_command_summarises_and_propagates_status() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    Command::new(bin())
        .args(["vacuum", "--config"])
        .arg(config("vacuum_cosh.toml"))
        .args(["--out"])
        .arg(&report)
        .output()
        .unwrap();
    let out = Command::new(bin())
        .args(["report", "--input"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("vacuum suite report"), "stdout: {}", stdout);
}

#[test]
fn csv_dump_contains_time_slices() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    let cfg = dir.path().join("evolve.toml");
    std::fs::write(
        &cfg,
        r#"
kind = "evolve"
x_min = -5.0
x_max = 5.0
resolutions = [32]
steps = [4]
potential = "0"
initial = "exp(-x^2/2)"
t_final = 0.01
"#,
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["evolve", "--config"])
        .arg(&cfg)
        .args(["--csv"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x,re,im");
    // 5 slices x 32 points
    assert_eq!(lines.len(), 1 + 5 * 32);
}

#[test]
fn lambda_rejects_non_constant_text() {
    let out = Command::new(bin())
        .args(["construct", "--config"])
        .arg(config("schrodinger_1d.toml"))
        .args(["--lambda", "x + 1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
