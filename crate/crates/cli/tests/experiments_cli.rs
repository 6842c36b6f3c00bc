//! The sweep and scan subcommands end to end at a small grid, including the
//! byte-identical rerun guarantee for report files.

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

const SWEEP_CFG: &str = "n = 16\nalpha = 0\nmu = 0.05\nt_end = 0.05\ndt = 2e-3\n\
                         ic = taylor_green+single_mode_b\nic_amp_b = 0.5\n\
                         diag_interval = 5\noutput_dir = out\n";

#[test]
fn sweep_alpha_writes_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(&cfg, SWEEP_CFG).unwrap();
    let cfg = cfg.to_str().unwrap();

    let run = |tag: &str| {
        let out = mhdv(&["sweep-alpha", "--config", cfg, "--alphas", "0.1,0.05,0.025", "--tag", tag], dir.path());
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8_lossy(&out.stdout).to_string()
    };
    let stdout = run("t1");
    assert!(stdout.contains("log-log slope"), "got: {stdout}");

    let report = dir.path().join("out/sweep_t1/report.csv");
    assert!(report.exists());
    for a in ["0.1", "0.05", "0.025"] {
        assert!(dir.path().join(format!("out/sweep_t1/alpha_{a}.csv")).exists());
    }
    let summary = fs::read_to_string(dir.path().join("out/sweep_t1/summary.txt")).unwrap();
    assert!(summary.contains("alpha sweep"));

    // rerunning with identical inputs reproduces the files byte for byte
    run("t2");
    for f in ["report.csv", "alpha_0.05.csv", "summary.txt"] {
        let a = fs::read(dir.path().join("out/sweep_t1").join(f)).unwrap();
        let b = fs::read(dir.path().join("out/sweep_t2").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between reruns");
    }

    // errors at matched times start at zero (shared initial data)
    let alpha_csv = fs::read_to_string(dir.path().join("out/sweep_t1/alpha_0.1.csv")).unwrap();
    let first_row = alpha_csv.lines().nth(1).unwrap();
    let cols: Vec<f64> = first_row.split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(cols[0], 0.0);
    assert_eq!(cols[1], 0.0, "e_u(0) must vanish for shared initial data");
}

#[test]
fn sweep_alpha_rejects_bad_lists() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(&cfg, SWEEP_CFG).unwrap();
    let cfg = cfg.to_str().unwrap();
    // ascending order
    let out = mhdv(&["sweep-alpha", "--config", cfg, "--alphas", "0.05,0.1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // garbage
    let out = mhdv(&["sweep-alpha", "--config", cfg, "--alphas", "a,b"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn blowup_scan_smooth_case_reports_no_indication() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.cfg");
    fs::write(&cfg, SWEEP_CFG).unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = mhdv(
        &["blowup-scan", "--config", cfg, "--alphas", "0.1,0.05,0.025", "--t-star", "0.05"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("flag: no indication"), "got: {stdout}");
    assert!(dir.path().join("out/scan_default/indicator.csv").exists());
    assert!(dir.path().join("out/scan_default/exponents.csv").exists());
}

#[test]
fn blowup_scan_requires_three_alphas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.cfg");
    fs::write(&cfg, SWEEP_CFG).unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = mhdv(
        &["blowup-scan", "--config", cfg, "--alphas", "0.1,0.05", "--t-star", "0.05"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(">= 3 alphas"));
}
