//! End-to-end checks of the installed binary surface.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mhdv(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhdv"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = mhdv(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.to_lowercase().contains("usage"), "got: {msg}");
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = mhdv(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn run_with_zero_t_end_emits_initial_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        "n = 8\nalpha = 0.1\nmu = 0.01\nt_end = 0\nic = taylor_green\ndt = 1e-3\n",
    );
    let out = mhdv(&["run", "--config", &cfg, "--output-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let diag = fs::read_to_string(dir.path().join("o/diag.csv")).unwrap();
    let lines: Vec<&str> = diag.lines().collect();
    assert_eq!(lines.len(), 2, "header + one row, got: {diag}");
    assert!(lines[0].starts_with("t,l2_u,v_u,l2_B,v_B,"));
    assert!(dir.path().join("o/final.snap").exists());
}

#[test]
fn invalid_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.cfg",
        "n = 8\nalpha = -1\nmu = 0.01\nt_end = 1\nic = taylor_green\n",
    );
    let out = mhdv(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha must be >= 0"));
}

#[test]
fn diff_of_identical_snapshots_prints_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        "n = 8\nalpha = 0.1\nmu = 0.01\nt_end = 0.002\nic = taylor_green\ndt = 1e-3\n",
    );
    let out = mhdv(&["run", "--config", &cfg, "--output-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let snap = dir.path().join("o/final.snap");
    let snap = snap.to_str().unwrap();
    for norm in ["l2", "h1"] {
        let out = mhdv(&["diff", snap, snap, "--norm", norm], dir.path());
        assert_eq!(out.status.code(), Some(0));
        let printed = String::from_utf8_lossy(&out.stdout);
        let value: f64 = printed.trim().parse().unwrap();
        assert_eq!(value, 0.0, "norm {norm} printed {printed}");
    }
}

#[test]
fn diff_missing_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = mhdv(&["diff", "nope.snap", "nope.snap", "--norm", "l2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spectrum_reports_shell_energies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        // single_mode_b puts all magnetic energy in shell 1, u stays zero
        "n = 8\nalpha = 0.1\nmu = 0\nt_end = 0\nic = single_mode_b\nic_amp_b = 1\ndt = 1e-3\n",
    );
    let out = mhdv(&["run", "--config", &cfg, "--output-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let out = mhdv(&["spectrum", "o/final.snap"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "shell,e_u,e_B");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    // B = cos(2πx) e₂: |B|² = 1/2, so E_B = 1/4 in shell 1 and nothing else
    for row in &rows {
        let (shell, e_u, e_b) = (row[0], row[1], row[2]);
        assert_eq!(e_u, 0.0);
        if shell == 1.0 {
            assert!((e_b - 0.25).abs() < 1e-12);
        } else {
            assert_eq!(e_b, 0.0);
        }
    }
}

#[test]
fn verify_fast_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = mhdv(&["verify", "--level", "fast"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "output: {stdout}");
    assert!(stdout.contains("all checks passed"), "output: {stdout}");
    assert!(!stdout.contains("FAIL"), "output: {stdout}");
}

#[test]
fn verify_full_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = mhdv(&["verify", "--level", "full"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "output: {stdout}");
    assert!(stdout.contains("resistive single-mode decay"), "output: {stdout}");
    assert!(stdout.contains("all checks passed"), "output: {stdout}");
}
