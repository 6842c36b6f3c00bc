//! The α→0 convergence study against a reference run and the blow-up
//! criterion scan.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;
use crate::operators::{self, OperatorContext};
use crate::stepper::{DtSpec, SimParams, SimState, Stepper};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `x`. When `y` is constant the fit is
/// exact with slope 0 and r² = 1.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "fit needs matching samples (>= 2 points), got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 =
        xs.iter().zip(ys).map(|(x, y)| (y - (intercept + slope * x)).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(FitResult { slope, intercept, r2 })
}

/// Least squares on `(log x, log y)`; rejects nonpositive input and needs at
/// least three points.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "log-log fit needs >= 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit requires positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Error curves of one regularized run against the reference.
#[derive(Debug, Clone)]
pub struct AlphaErrors {
    pub alpha: f64,
    pub ts: Vec<f64>,
    /// |u^α − u| per sample
    pub e_u: Vec<f64>,
    /// ‖u^α − u‖ per sample
    pub e_uv: Vec<f64>,
    /// |B^α − B| per sample
    pub e_b: Vec<f64>,
    /// (∫₀ᵀ ‖B^α − B‖² dt)^{1/2}, trapezoid over the samples
    pub e_bv_int: f64,
    pub sup_e_u: f64,
    pub sup_e_uv: f64,
    pub sup_e_b: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub alphas: Vec<f64>,
    pub per_alpha: Vec<AlphaErrors>,
    /// Log-log slopes of the sup-in-time errors vs α (needs >= 3 alphas).
    pub slope_sup_e_u: Option<FitResult>,
    pub slope_sup_e_uv: Option<FitResult>,
    pub slope_sup_e_b: Option<FitResult>,
    pub slope_e_bv_int: Option<FitResult>,
}

fn require_descending_positive(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha list is empty".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidParameter("alphas must be > 0".into()));
    }
    if alphas.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParameter("alphas must be strictly decreasing".into()));
    }
    Ok(())
}

fn fixed_dt(params: &SimParams) -> Result<f64> {
    match params.dt {
        DtSpec::Fixed(dt) => Ok(dt),
        DtSpec::Auto => Err(Error::InvalidParameter(
            "sweeps require a fixed dt so sampling instants match across runs".into(),
        )),
    }
}

struct LockstepRun {
    stepper: Stepper,
    state: SimState,
    dissipated: f64,
    voigt0: f64,
}

impl LockstepRun {
    fn new(grid: &WavenumberGrid, alpha: f64, params: &SimParams, ic: &(SpectralField, SpectralField)) -> Result<Self> {
        let ctx = OperatorContext::new(grid, alpha)?;
        let stepper = Stepper::new(ctx, params.mu, params.nu, params.integrating_factor);
        let state = SimState::new(ic.0.clone(), ic.1.clone());
        let voigt0 = operators::voigt_energy(&state.u, &state.b, alpha);
        Ok(Self { stepper, state, dissipated: 0.0, voigt0 })
    }

    fn advance(&mut self, dt: f64, land_at: Option<f64>) -> Result<()> {
        let (next, dinc) = self.stepper.step(&self.state, dt)?;
        self.state = next;
        if let Some(t) = land_at {
            self.state.t = t;
        }
        self.dissipated += dinc;
        // a-priori bound: α²‖u‖² + |u|² + |B|² + 2μ∫‖B‖² ≤ (K¹_α)²
        let alpha = self.stepper.alpha();
        let now = operators::voigt_energy(&self.state.u, &self.state.b, alpha) + self.dissipated;
        let tol = 1e-8 * self.voigt0;
        if now > self.voigt0 + tol {
            return Err(Error::BoundViolated {
                t: self.state.t,
                lhs: now,
                bound: self.voigt0,
                tol,
            });
        }
        Ok(())
    }
}

/// Run the reference (α = `base_params.alpha`, normally 0) and one run per
/// sweep α in lockstep from the shared initial data, sampling matched
/// instants every `sample_every` steps.
pub fn alpha_sweep(
    base_params: &SimParams,
    alphas: &[f64],
    shared_ic: &(SpectralField, SpectralField),
    sample_every: u64,
) -> Result<SweepReport> {
    require_descending_positive(alphas)?;
    base_params.validate()?;
    if base_params.alpha == 0.0 && base_params.mu <= 0.0 {
        return Err(Error::InvalidParameter("the α→0 study requires mu > 0".into()));
    }
    let dt = fixed_dt(base_params)?;
    let grid = shared_ic.0.grid().clone();
    if grid.n() != base_params.n {
        return Err(Error::GridMismatch(base_params.n, grid.n()));
    }
    let sample_every = sample_every.max(1);

    let mut reference = LockstepRun::new(&grid, base_params.alpha, base_params, shared_ic)?;
    let mut runs = alphas
        .iter()
        .map(|&a| LockstepRun::new(&grid, a, base_params, shared_ic))
        .collect::<Result<Vec<_>>>()?;

    let mut ts = vec![0.0];
    let mut errs: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> =
        vec![(vec![], vec![], vec![]); alphas.len()];
    let mut bv_sq: Vec<Vec<f64>> = vec![vec![]; alphas.len()];
    let sample = |reference: &LockstepRun,
                  runs: &[LockstepRun],
                  errs: &mut Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
                  bv_sq: &mut Vec<Vec<f64>>| {
        for (i, r) in runs.iter().enumerate() {
            let du = r.state.u.sub(&reference.state.u);
            let db = r.state.b.sub(&reference.state.b);
            errs[i].0.push(du.l2_norm());
            errs[i].1.push(operators::v_norm(&du));
            errs[i].2.push(db.l2_norm());
            bv_sq[i].push(operators::v_norm(&db).powi(2));
        }
    };
    sample(&reference, &runs, &mut errs, &mut bv_sq);

    while reference.state.t < base_params.t_end {
        let mut h = dt;
        let landing = reference.state.t + h >= base_params.t_end;
        if landing {
            h = base_params.t_end - reference.state.t;
        }
        let land_at = landing.then_some(base_params.t_end);
        reference
            .advance(h, land_at)
            .map_err(|e| Error::ReferenceLost(e.to_string()))?;
        for r in runs.iter_mut() {
            r.advance(h, land_at)?;
        }
        if reference.state.step_index % sample_every == 0 || landing {
            ts.push(reference.state.t);
            sample(&reference, &runs, &mut errs, &mut bv_sq);
        }
    }

    let per_alpha: Vec<AlphaErrors> = alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let (e_u, e_uv, e_b) = errs[i].clone();
            let e_bv_int = trapezoid(&ts, &bv_sq[i]).sqrt();
            let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x));
            AlphaErrors {
                alpha,
                ts: ts.clone(),
                sup_e_u: sup(&e_u),
                sup_e_uv: sup(&e_uv),
                sup_e_b: sup(&e_b),
                e_u,
                e_uv,
                e_b,
                e_bv_int,
            }
        })
        .collect();

    let fit = |get: &dyn Fn(&AlphaErrors) -> f64| -> Option<FitResult> {
        if alphas.len() < 3 {
            return None;
        }
        let ys: Vec<f64> = per_alpha.iter().map(get).collect();
        fit_loglog_slope(alphas, &ys).ok()
    };
    Ok(SweepReport {
        alphas: alphas.to_vec(),
        slope_sup_e_u: fit(&|e| e.sup_e_u),
        slope_sup_e_uv: fit(&|e| e.sup_e_uv),
        slope_sup_e_b: fit(&|e| e.sup_e_b),
        slope_e_bv_int: fit(&|e| e.e_bv_int),
        per_alpha,
    })
}

fn trapezoid(ts: &[f64], ys: &[f64]) -> f64 {
    ts.windows(2)
        .zip(ys.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanFlag {
    NoIndication,
    PossibleSingularity,
}

impl ScanFlag {
    pub fn label(&self) -> &'static str {
        match self {
            ScanFlag::NoIndication => "no indication",
            ScanFlag::PossibleSingularity => "criterion indicates possible singularity",
        }
    }
}

/// Exponent below which the extrapolated limit of `I ≈ c·α^p` is treated as
/// bounded away from zero. Heuristic: the limsup as α→0 is not computable.
pub const SCAN_EXPONENT_FLOOR: f64 = 0.25;

/// Per-time power-law fit of the indicator `I(α, t) = α²‖u^α(t)‖²`.
#[derive(Debug, Clone)]
pub struct BlowupScanReport {
    pub alphas: Vec<f64>,
    pub ts: Vec<f64>,
    /// `indicator[i][j]` = I(alphas[i], ts[j]); NaN rows mark aborted runs.
    pub indicator: Vec<Vec<f64>>,
    /// Abort message per α, if that run failed (the scan continues).
    pub run_errors: Vec<Option<String>>,
    /// Fitted exponent p(t); NaN where the indicator is identically zero.
    pub exponent: Vec<f64>,
    pub fit_r2: Vec<f64>,
    /// Extrapolated α→0 limit estimate per t: 0 when p ≥ the floor,
    /// otherwise the fitted prefactor c(t).
    pub limit_estimate: Vec<f64>,
    pub min_exponent: f64,
    pub max_limit: f64,
    pub flag: ScanFlag,
    /// μ = 0 scans sit outside the strong-solution theory backing the sweep.
    pub outside_strong_theory: bool,
}

/// Integrate each α to `t_star` from shared initial data and fit
/// `I(α, t) ≈ c(t)·α^{p(t)}` at every sampled t. Needs at least three alphas
/// for the extrapolation.
pub fn blowup_scan(
    base_params: &SimParams,
    alphas: &[f64],
    shared_ic: &(SpectralField, SpectralField),
    t_star: f64,
    sample_every: u64,
) -> Result<BlowupScanReport> {
    require_descending_positive(alphas)?;
    if alphas.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "blow-up extrapolation needs >= 3 alphas, got {}",
            alphas.len()
        )));
    }
    if !(t_star > 0.0 && t_star.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_star must be > 0, got {t_star}")));
    }
    let mut params = base_params.clone();
    params.t_end = t_star;
    if params.alpha == 0.0 && params.mu == 0.0 && params.smoothness_horizon.is_none() {
        // the scan itself never runs α = 0; keep validation happy
        params.smoothness_horizon = Some(t_star);
    }
    params.validate()?;
    let dt = fixed_dt(&params)?;
    let grid = shared_ic.0.grid().clone();
    if grid.n() != params.n {
        return Err(Error::GridMismatch(params.n, grid.n()));
    }
    let sample_every = sample_every.max(1);

    // sampling instants from the shared fixed-dt schedule
    let mut ts = vec![0.0];
    {
        let mut t = 0.0f64;
        let mut step: u64 = 0;
        while t < t_star {
            let mut h = dt;
            let landing = t + h >= t_star;
            if landing {
                h = t_star - t;
            }
            t += h;
            if landing {
                t = t_star;
            }
            step += 1;
            if step % sample_every == 0 || t >= t_star {
                ts.push(t);
            }
        }
    }

    let mut indicator = Vec::with_capacity(alphas.len());
    let mut run_errors = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        match scan_single_run(&grid, alpha, &params, shared_ic, t_star, sample_every) {
            Ok(series) => {
                debug_assert_eq!(series.len(), ts.len());
                indicator.push(series);
                run_errors.push(None);
            }
            Err(e) => {
                indicator.push(vec![f64::NAN; ts.len()]);
                run_errors.push(Some(e.to_string()));
            }
        }
    }

    // per-time power-law fit over the alphas that survived
    let mut exponent = Vec::with_capacity(ts.len());
    let mut fit_r2 = Vec::with_capacity(ts.len());
    let mut limit_estimate = Vec::with_capacity(ts.len());
    for j in 0..ts.len() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, series) in indicator.iter().enumerate() {
            let v = series[j];
            if v.is_finite() {
                xs.push(alphas[i]);
                ys.push(v);
            }
        }
        if ys.iter().all(|&v| v == 0.0) {
            // e.g. u ≡ 0 dynamics: indicator identically zero, limit zero
            exponent.push(f64::NAN);
            fit_r2.push(f64::NAN);
            limit_estimate.push(0.0);
            continue;
        }
        if xs.len() < 3 || ys.iter().any(|&v| !(v > 0.0)) {
            exponent.push(f64::NAN);
            fit_r2.push(f64::NAN);
            limit_estimate.push(f64::NAN);
            continue;
        }
        let fit = fit_loglog_slope(&xs, &ys)?;
        exponent.push(fit.slope);
        fit_r2.push(fit.r2);
        limit_estimate.push(if fit.slope >= SCAN_EXPONENT_FLOOR {
            0.0
        } else {
            fit.intercept.exp()
        });
    }

    let min_exponent =
        exponent.iter().filter(|v| v.is_finite()).fold(f64::INFINITY, |m, &v| m.min(v));
    let max_limit =
        limit_estimate.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, &v| m.max(v));
    let flag = if max_limit > 0.0 {
        ScanFlag::PossibleSingularity
    } else {
        ScanFlag::NoIndication
    };
    Ok(BlowupScanReport {
        alphas: alphas.to_vec(),
        ts,
        indicator,
        run_errors,
        exponent,
        fit_r2,
        limit_estimate,
        min_exponent,
        max_limit,
        flag,
        outside_strong_theory: base_params.mu == 0.0,
    })
}

fn scan_single_run(
    grid: &WavenumberGrid,
    alpha: f64,
    params: &SimParams,
    ic: &(SpectralField, SpectralField),
    t_star: f64,
    sample_every: u64,
) -> Result<Vec<f64>> {
    let dt = fixed_dt(params)?;
    let mut run = LockstepRun::new(grid, alpha, params, ic)?;
    let ind = |r: &LockstepRun| alpha * alpha * operators::v_norm(&r.state.u).powi(2);
    let mut series = vec![ind(&run)];
    while run.state.t < t_star {
        let mut h = dt;
        let landing = run.state.t + h >= t_star;
        if landing {
            h = t_star - run.state.t;
        }
        run.advance(h, landing.then_some(t_star))?;
        if run.state.step_index % sample_every == 0 || landing {
            series.push(ind(&run));
        }
    }
    Ok(series)
}
