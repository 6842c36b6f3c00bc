//! CSV serialization of sweep and scan reports.

use anyhow::{Context, Result};
use mhdv_core::experiments::{BlowupScanReport, FitResult, SweepReport};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn fit_line(name: &str, fit: &Option<FitResult>) -> String {
    match fit {
        Some(f) => format!(
            "{name}: slope {:.4}, intercept {:.4}, r2 {:.6}\n",
            f.slope, f.intercept, f.r2
        ),
        None => format!("{name}: not fitted (needs >= 3 alphas)\n"),
    }
}

/// Write `sweep_<tag>/alpha_<value>.csv` per α plus `report.csv` and
/// `summary.txt`; returns the human-readable summary.
pub fn write_sweep(report: &SweepReport, out_root: &Path, tag: &str) -> Result<(PathBuf, String)> {
    let dir = out_root.join(format!("sweep_{tag}"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    for e in &report.per_alpha {
        let mut csv = String::from("t,e_u,e_uV,e_B\n");
        for i in 0..e.ts.len() {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                f17(e.ts[i]),
                f17(e.e_u[i]),
                f17(e.e_uv[i]),
                f17(e.e_b[i])
            );
        }
        write(&dir.join(format!("alpha_{}.csv", e.alpha)), &csv)?;
    }

    let mut csv = String::from("alpha,sup_e_u,sup_e_uV,sup_e_B,e_BV_int\n");
    for e in &report.per_alpha {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            f17(e.alpha),
            f17(e.sup_e_u),
            f17(e.sup_e_uv),
            f17(e.sup_e_b),
            f17(e.e_bv_int)
        );
    }
    write(&dir.join("report.csv"), &csv)?;

    let mut summary = String::new();
    summary.push_str("alpha sweep against the reference run\n");
    for e in &report.per_alpha {
        let _ = writeln!(
            summary,
            "  alpha {:>9}: sup|u^a-u| {:.6e}  sup||u^a-u|| {:.6e}  sup|B^a-B| {:.6e}  (int ||B^a-B||^2)^1/2 {:.6e}",
            e.alpha, e.sup_e_u, e.sup_e_uv, e.sup_e_b, e.e_bv_int
        );
    }
    summary.push_str(&fit_line("log-log slope sup|u^a-u|  vs alpha", &report.slope_sup_e_u));
    summary.push_str(&fit_line("log-log slope sup||u^a-u|| vs alpha", &report.slope_sup_e_uv));
    summary.push_str(&fit_line("log-log slope sup|B^a-B|  vs alpha", &report.slope_sup_e_b));
    summary.push_str(&fit_line("log-log slope L2t V-error  vs alpha", &report.slope_e_bv_int));
    write(&dir.join("summary.txt"), &summary)?;
    Ok((dir, summary))
}

/// Write `scan_<tag>/indicator.csv`, `exponents.csv`, and `summary.txt`;
/// returns the human-readable summary.
pub fn write_scan(report: &BlowupScanReport, out_root: &Path, tag: &str) -> Result<(PathBuf, String)> {
    let dir = out_root.join(format!("scan_{tag}"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut csv = String::from("t");
    for a in &report.alphas {
        let _ = write!(csv, ",alpha_{a}");
    }
    csv.push('\n');
    for (j, &t) in report.ts.iter().enumerate() {
        let _ = write!(csv, "{}", f17(t));
        for series in &report.indicator {
            let _ = write!(csv, ",{}", f17(series[j]));
        }
        csv.push('\n');
    }
    write(&dir.join("indicator.csv"), &csv)?;

    let mut csv = String::from("t,exponent,r2,limit_estimate\n");
    for j in 0..report.ts.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            f17(report.ts[j]),
            f17(report.exponent[j]),
            f17(report.fit_r2[j]),
            f17(report.limit_estimate[j])
        );
    }
    write(&dir.join("exponents.csv"), &csv)?;

    let mut summary = String::new();
    summary.push_str("blow-up indicator scan (heuristic: limsup over alpha -> 0 is not computable)\n");
    let _ = writeln!(summary, "  flag: {}", report.flag.label());
    let _ = writeln!(summary, "  min fitted exponent over t: {:.4}", report.min_exponent);
    let _ = writeln!(summary, "  max extrapolated limit over t: {:.6e}", report.max_limit);
    if report.outside_strong_theory {
        summary.push_str("  note: mu = 0 — outside strong-solution theory\n");
    }
    for (a, err) in report.alphas.iter().zip(&report.run_errors) {
        if let Some(msg) = err {
            let _ = writeln!(summary, "  alpha {a}: run aborted: {msg}");
        }
    }
    write(&dir.join("summary.txt"), &summary)?;
    Ok((dir, summary))
}
