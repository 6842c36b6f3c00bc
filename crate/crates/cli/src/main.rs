use anyhow::{anyhow, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use mhdv_cli::config::{parse_config, RunConfig};
use mhdv_cli::report;
use mhdv_cli::snapshot::{load_snapshot, save_snapshot};
use mhdv_core::diagnostics::{DiagRecord, CSV_HEADER};
use mhdv_core::oracle::{self, VerifyLevel};
use mhdv_core::stepper::{self, RunObserver, RunSchedule, SimState};
use mhdv_core::{experiments, ic, operators, Error as CoreError, WavenumberGrid};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mhdv", about = "Pseudo-spectral MHD-Voigt simulator on the periodic unit torus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a configured run, writing diagnostics and snapshots
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Resume from a checkpoint snapshot
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Convergence study: per-alpha runs against the alpha = 0 reference
    SweepAlpha {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated descending list, e.g. 0.1,0.05,0.025
        #[arg(long)]
        alphas: String,
        #[arg(long, default_value = "default")]
        tag: String,
    },
    /// Blow-up criterion scan: power-law fit of alpha^2 ||u^alpha||^2
    BlowupScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        alphas: String,
        #[arg(long = "t-star")]
        t_star: f64,
        #[arg(long, default_value = "default")]
        tag: String,
    },
    /// Norm of the difference between two snapshots
    Diff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = NormKind::L2)]
        norm: NormKind,
    },
    /// Shell-summed energy spectrum of a snapshot (CSV on stdout)
    Spectrum { file: PathBuf },
    /// Run the identity/oracle suites
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    L2,
    H1,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

/// Exit 1: bad input (config, arguments, files). Exit 2: runtime abort.
enum CliError {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

fn validation<T>(e: impl Into<anyhow::Error>) -> CliResult<T> {
    Err(CliError::Validation(e.into()))
}

fn core_err(e: CoreError) -> CliError {
    match e {
        CoreError::Blowup { .. }
        | CoreError::BoundViolated { .. }
        | CoreError::ReferenceLost(_)
        | CoreError::Callback(_) => CliError::Runtime(anyhow!(e)),
        _ => CliError::Validation(anyhow!(e)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Run { config, output_dir, resume } => cmd_run(&config, output_dir, resume),
        Cmd::SweepAlpha { config, alphas, tag } => cmd_sweep(&config, &alphas, &tag),
        Cmd::BlowupScan { config, alphas, t_star, tag } => {
            cmd_scan(&config, &alphas, t_star, &tag)
        }
        Cmd::Diff { a, b, norm } => cmd_diff(&a, &b, norm),
        Cmd::Spectrum { file } => cmd_spectrum(&file),
        Cmd::Verify { level } => cmd_verify(level),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("runtime abort: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(CliError::Validation)?;
    parse_config(&text).map_err(CliError::Validation)
}

fn parse_alpha_list(s: &str) -> CliResult<Vec<f64>> {
    let alphas: std::result::Result<Vec<f64>, _> =
        s.split(',').map(|v| v.trim().parse::<f64>()).collect();
    match alphas {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => validation(anyhow!("--alphas must be a comma-separated list of numbers, got '{s}'")),
    }
}

/// Streams diagnostics to CSV and snapshots/checkpoints to the output
/// directory.
struct FileObserver {
    dir: PathBuf,
    diag: BufWriter<File>,
    alpha: f64,
    mu: f64,
    nu: f64,
    skip_first_diag: bool,
}

impl FileObserver {
    fn new(cfg: &RunConfig, dir: &Path, resuming: bool) -> Result<Self> {
        let diag_path = dir.join("diag.csv");
        let mut opts = OpenOptions::new();
        if resuming {
            opts.append(true).create(true);
        } else {
            opts.write(true).create(true).truncate(true);
        }
        let file =
            opts.open(&diag_path).with_context(|| format!("opening {}", diag_path.display()))?;
        let mut diag = BufWriter::new(file);
        if !resuming {
            writeln!(diag, "{CSV_HEADER}")
                .with_context(|| format!("writing {}", diag_path.display()))?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            diag,
            alpha: cfg.params.alpha,
            mu: cfg.params.mu,
            nu: cfg.params.nu,
            skip_first_diag: resuming,
        })
    }

    fn finish(mut self) -> Result<()> {
        self.diag.flush().context("flushing diag.csv")
    }
}

fn callback_err(e: anyhow::Error) -> CoreError {
    CoreError::Callback(format!("{e:#}"))
}

impl RunObserver for FileObserver {
    fn on_diag(&mut self, rec: &DiagRecord) -> mhdv_core::Result<()> {
        if self.skip_first_diag {
            // the resume point was already logged by the interrupted run
            self.skip_first_diag = false;
            return Ok(());
        }
        writeln!(self.diag, "{}", rec.csv_row())
            .map_err(|e| CoreError::Callback(format!("writing diag.csv: {e}")))
    }

    fn on_snapshot(&mut self, state: &SimState) -> mhdv_core::Result<()> {
        let path = self.dir.join(format!("snap_{:08}.snap", state.step_index));
        save_snapshot(state, self.alpha, self.mu, self.nu, &path).map_err(callback_err)
    }

    fn on_checkpoint(&mut self, state: &SimState) -> mhdv_core::Result<()> {
        let path = self.dir.join("checkpoint.snap");
        save_snapshot(state, self.alpha, self.mu, self.nu, &path).map_err(callback_err)
    }
}

fn cmd_run(
    config: &Path,
    output_dir: Option<PathBuf>,
    resume: Option<PathBuf>,
) -> CliResult<ExitCode> {
    let mut cfg = load_config(config)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))
        .map_err(CliError::Validation)?;

    let schedule = RunSchedule {
        diag_interval: cfg.diag_interval,
        snapshot_interval: cfg.snapshot_interval,
        checkpoint_interval: cfg.checkpoint_interval,
        hs_extra: cfg.hs_monitor_set.clone(),
    };

    let resuming = resume.is_some();
    let mut observer =
        FileObserver::new(&cfg, &cfg.output_dir, resuming).map_err(CliError::Validation)?;

    let final_state = match resume {
        None => stepper::run(&cfg.params, &schedule, &mut observer).map_err(core_err)?,
        Some(path) => {
            let snap = load_snapshot(&path).map_err(CliError::Validation)?;
            let p = &cfg.params;
            if snap.n != p.n || snap.alpha != p.alpha || snap.mu != p.mu || snap.nu != p.nu {
                return validation(anyhow!(
                    "checkpoint {} disagrees with the config: (n, alpha, mu, nu) = \
                     ({}, {}, {}, {}) vs ({}, {}, {}, {})",
                    path.display(),
                    snap.n,
                    snap.alpha,
                    snap.mu,
                    snap.nu,
                    p.n,
                    p.alpha,
                    p.mu,
                    p.nu
                ));
            }
            stepper::run_from(&cfg.params, snap.state(), &schedule, &mut observer)
                .map_err(core_err)?
        }
    };

    observer.finish().map_err(CliError::Runtime)?;
    let final_path = cfg.output_dir.join("final.snap");
    save_snapshot(&final_state, cfg.params.alpha, cfg.params.mu, cfg.params.nu, &final_path)
        .map_err(CliError::Runtime)?;
    println!(
        "run complete: t = {}, steps = {}, |u| = {:.6e}, |B| = {:.6e}",
        final_state.t,
        final_state.step_index,
        final_state.u.l2_norm(),
        final_state.b.l2_norm()
    );
    Ok(ExitCode::SUCCESS)
}

fn shared_ic_from_config(cfg: &RunConfig) -> CliResult<(mhdv_core::SpectralField, mhdv_core::SpectralField)> {
    let grid = WavenumberGrid::new(cfg.params.n).map_err(core_err)?;
    ic::make_ic(&cfg.params.ic, &grid, cfg.params.seed).map_err(core_err)
}

fn cmd_sweep(config: &Path, alphas: &str, tag: &str) -> CliResult<ExitCode> {
    let cfg = load_config(config)?;
    let alphas = parse_alpha_list(alphas)?;
    let shared = shared_ic_from_config(&cfg)?;
    let report =
        experiments::alpha_sweep(&cfg.params, &alphas, &shared, cfg.diag_interval)
            .map_err(core_err)?;
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))
        .map_err(CliError::Validation)?;
    let (dir, summary) =
        report::write_sweep(&report, &cfg.output_dir, tag).map_err(CliError::Runtime)?;
    print!("{summary}");
    println!("report written to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_scan(config: &Path, alphas: &str, t_star: f64, tag: &str) -> CliResult<ExitCode> {
    let cfg = load_config(config)?;
    let alphas = parse_alpha_list(alphas)?;
    let shared = shared_ic_from_config(&cfg)?;
    let report =
        experiments::blowup_scan(&cfg.params, &alphas, &shared, t_star, cfg.diag_interval)
            .map_err(core_err)?;
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))
        .map_err(CliError::Validation)?;
    let (dir, summary) =
        report::write_scan(&report, &cfg.output_dir, tag).map_err(CliError::Runtime)?;
    print!("{summary}");
    println!("report written to {}", dir.display());
    if report.run_errors.iter().all(|e| e.is_some()) {
        return Err(CliError::Runtime(anyhow!("every scan run aborted")));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_diff(a: &Path, b: &Path, norm: NormKind) -> CliResult<ExitCode> {
    let sa = load_snapshot(a).map_err(CliError::Validation)?;
    let sb = load_snapshot(b).map_err(CliError::Validation)?;
    if sa.n != sb.n {
        return validation(anyhow!("snapshots have different grids: {} vs {}", sa.n, sb.n));
    }
    let du = sa.u.sub(&sb.u);
    let db = sa.b.sub(&sb.b);
    let value = match norm {
        NormKind::L2 => (du.l2_norm().powi(2) + db.l2_norm().powi(2)).sqrt(),
        NormKind::H1 => {
            (operators::v_norm(&du).powi(2) + operators::v_norm(&db).powi(2)).sqrt()
        }
    };
    println!("{value:.16e}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_spectrum(file: &Path) -> CliResult<ExitCode> {
    let snap = load_snapshot(file).map_err(CliError::Validation)?;
    let grid = snap.u.grid().clone();
    let max_shell = (grid.kcut() as f64 * 3.0f64.sqrt()).round() as usize + 1;
    let mut e_u = vec![0.0f64; max_shell + 1];
    let mut e_b = vec![0.0f64; max_shell + 1];
    for (idx, k) in grid.iter_modes() {
        let shell = ((k[0] as f64).powi(2) + (k[1] as f64).powi(2) + (k[2] as f64).powi(2))
            .sqrt()
            .round() as usize;
        if shell > max_shell {
            continue;
        }
        for c in 0..3 {
            e_u[shell] += 0.5 * snap.u.coeff(c, idx).norm_sqr();
            e_b[shell] += 0.5 * snap.b.coeff(c, idx).norm_sqr();
        }
    }
    println!("shell,e_u,e_B");
    for s in 0..=max_shell {
        println!("{s},{:.16e},{:.16e}", e_u[s], e_b[s]);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(level: LevelArg) -> CliResult<ExitCode> {
    let level = match level {
        LevelArg::Fast => VerifyLevel::Fast,
        LevelArg::Full => VerifyLevel::Full,
    };
    let report = oracle::verify(level).map_err(core_err)?;
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {}: {}", check.name, check.detail);
    }
    if report.all_passed() {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        validation(anyhow!("verification failed"))
    }
}
