//! Time integration: classical RK4 on the Voigt-filtered momentum equation,
//! with the resistive term integrated exactly per mode by an exponential
//! integrating factor.

use crate::diagnostics::{self, DiagRecord};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;
use crate::ic::{self, IcDescriptor};
use crate::operators::{self, OperatorContext};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtSpec {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
    pub n: usize,
    pub dt: DtSpec,
    pub dt_max: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub integrating_factor: bool,
    /// Required when `alpha = 0` and `mu = 0`: the run is then an unfiltered
    /// ideal MHD integration and is only meaningful while the reference
    /// solution stays smooth.
    pub smoothness_horizon: Option<f64>,
    pub ic: IcDescriptor,
    pub seed: u64,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be >= 0, got {}", self.mu));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be >= 0, got {}", self.nu));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if let DtSpec::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be > 0, got {dt}"));
            }
        }
        if !(self.dt_max > 0.0) {
            return bad(format!("dt_max must be > 0, got {}", self.dt_max));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if self.alpha == 0.0 && self.mu == 0.0 {
            match self.smoothness_horizon {
                Some(h) if self.t_end <= h => {}
                _ => {
                    return bad(
                        "alpha = 0 runs (reference MHD) require mu > 0 or t_end within \
                         a declared smoothness_horizon"
                            .into(),
                    )
                }
            }
        }
        WavenumberGrid::new(self.n)?;
        Ok(())
    }
}

/// The advanced pair `(u, B)` plus simulation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub u: SpectralField,
    pub b: SpectralField,
    pub t: f64,
    pub step_index: u64,
}

impl SimState {
    pub fn new(u: SpectralField, b: SpectralField) -> Self {
        Self { u, b, t: 0.0, step_index: 0 }
    }
}

/// CFL-style step control: `dt = safety · Δx / (max|u| + max|B| + ε)`,
/// capped at `dt_max`. Without the integrating factor the explicit resistive
/// term additionally restricts `dt ≤ safety / (μ |κ_max|²)`.
pub fn cfl_dt(state: &SimState, params: &SimParams) -> f64 {
    const EPS: f64 = 1e-30;
    let dx = 1.0 / params.n as f64;
    let speed = state.u.to_physical().max_norm() + state.b.to_physical().max_norm() + EPS;
    let mut dt = params.cfl_safety * dx / speed;
    if !params.integrating_factor && params.mu > 0.0 {
        let kmax = state.u.grid().kappa_max();
        dt = dt.min(params.cfl_safety / (params.mu * kmax * kmax));
    }
    dt.min(params.dt_max)
}

/// One integrator instance; owns the operator context and caches the
/// per-mode decay factors for the current dt.
pub struct Stepper {
    ctx: OperatorContext,
    mu: f64,
    nu: f64,
    use_if: bool,
    cached_dt: f64,
    decay_half: Vec<f64>,
    decay_full: Vec<f64>,
}

impl Stepper {
    pub fn new(ctx: OperatorContext, mu: f64, nu: f64, integrating_factor: bool) -> Self {
        Self {
            ctx,
            mu,
            nu,
            use_if: integrating_factor,
            cached_dt: f64::NAN,
            decay_half: Vec::new(),
            decay_full: Vec::new(),
        }
    }

    pub fn ctx(&mut self) -> &mut OperatorContext {
        &mut self.ctx
    }

    pub fn alpha(&self) -> f64 {
        self.ctx.alpha()
    }

    fn refresh_decay(&mut self, dt: f64) {
        if dt == self.cached_dt {
            return;
        }
        let grid = self.ctx.grid().clone();
        let m = grid.modes();
        self.decay_half.resize(m, 0.0);
        self.decay_full.resize(m, 0.0);
        for idx in 0..m {
            let a = self.mu * grid.kappa_sq(idx);
            self.decay_half[idx] = (-a * dt / 2.0).exp();
            self.decay_full[idx] = (-a * dt).exp();
        }
        self.cached_dt = dt;
    }

    fn rhs(&mut self, u: &SpectralField, b: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        // with the integrating factor the −μAB term is handled exactly by
        // the decay factors, so it is excluded here
        self.ctx.mhd_rhs(u, b, self.mu, self.nu, !self.use_if)
    }

    /// Advance one step of size `dt`. Returns the new state and the
    /// dissipation increment `2μ ∫_t^{t+dt} ‖B‖² ds`, accumulated with the
    /// same RK4 stages so the energy budget closes at integrator order.
    pub fn step(&mut self, state: &SimState, dt: f64) -> Result<(SimState, f64)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let use_if = self.use_if && self.mu > 0.0;
        if use_if {
            self.refresh_decay(dt);
        }
        let h = dt;
        let u0 = &state.u;
        let b0 = &state.b;

        let (k1u, k1b) = self.rhs(u0, b0)?;
        let d1 = b0.v_norm_sq();

        // stage 2: u0 + h/2 k1u, E(h/2)(b0 + h/2 k1b)
        let u1 = SpectralField::scaled_sum(u0, h / 2.0, &k1u);
        let mut b1 = SpectralField::scaled_sum(b0, h / 2.0, &k1b);
        if use_if {
            b1.mul_diagonal(&self.decay_half);
        }
        let (k2u, k2b) = self.rhs(&u1, &b1)?;
        let d2 = b1.v_norm_sq();

        // stage 3: u0 + h/2 k2u, E(h/2) b0 + h/2 k2b
        let u2 = SpectralField::scaled_sum(u0, h / 2.0, &k2u);
        let mut b2 = b0.clone();
        if use_if {
            b2.mul_diagonal(&self.decay_half);
        }
        b2.axpy(h / 2.0, &k2b);
        let (k3u, k3b) = self.rhs(&u2, &b2)?;
        let d3 = b2.v_norm_sq();

        // stage 4: u0 + h k3u, E(h) b0 + h E(h/2) k3b
        let u3 = SpectralField::scaled_sum(u0, h, &k3u);
        let mut b3 = b0.clone();
        if use_if {
            b3.mul_diagonal(&self.decay_full);
        }
        let mut k3b_half = k3b.clone();
        if use_if {
            k3b_half.mul_diagonal(&self.decay_half);
        }
        b3.axpy(h, &k3b_half);
        let (k4u, k4b) = self.rhs(&u3, &b3)?;
        let d4 = b3.v_norm_sq();

        // combine
        let mut u_new = SpectralField::combine4(
            u0,
            [(h / 6.0, &k1u), (h / 3.0, &k2u), (h / 3.0, &k3u), (h / 6.0, &k4u)],
        );

        let mut b_new = if use_if {
            let mut acc = b0.clone();
            acc.mul_diagonal(&self.decay_full);
            let mut k1b_full = k1b;
            k1b_full.mul_diagonal(&self.decay_full);
            acc.axpy(h / 6.0, &k1b_full);
            let mut k23 = k2b;
            k23.axpy(1.0, &k3b);
            k23.mul_diagonal(&self.decay_half);
            acc.axpy(h / 3.0, &k23);
            acc.axpy(h / 6.0, &k4b);
            acc
        } else {
            SpectralField::combine4(
                b0,
                [(h / 6.0, &k1b), (h / 3.0, &k2b), (h / 3.0, &k3b), (h / 6.0, &k4b)],
            )
        };

        if u_new.has_non_finite() || b_new.has_non_finite() {
            return Err(Error::Blowup { step: state.step_index + 1, t: state.t + dt });
        }

        u_new.set_divfree(true);
        b_new.set_divfree(true);
        let dissipated_inc = 2.0 * self.mu * h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
        let new_state = SimState {
            u: u_new,
            b: b_new,
            t: state.t + dt,
            step_index: state.step_index + 1,
        };
        Ok((new_state, dissipated_inc))
    }
}

/// Cadences at which the driver emits diagnostics, field snapshots, and
/// restart checkpoints (in steps; `None` disables).
#[derive(Debug, Clone)]
pub struct RunSchedule {
    pub diag_interval: u64,
    pub snapshot_interval: Option<u64>,
    pub checkpoint_interval: Option<u64>,
    pub hs_extra: Vec<f64>,
}

impl Default for RunSchedule {
    fn default() -> Self {
        Self { diag_interval: 1, snapshot_interval: None, checkpoint_interval: None, hs_extra: vec![] }
    }
}

/// Sink for driver events; the CLI writes CSV rows and snapshot files,
/// tests collect records in memory.
pub trait RunObserver {
    fn on_diag(&mut self, _rec: &DiagRecord) -> Result<()> {
        Ok(())
    }
    fn on_snapshot(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }
    fn on_checkpoint(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }
}

/// No-op observer.
pub struct NullObserver;
impl RunObserver for NullObserver {}

/// Collects every diagnostic record.
#[derive(Default)]
pub struct RecordingObserver {
    pub records: Vec<DiagRecord>,
}

impl RunObserver for RecordingObserver {
    fn on_diag(&mut self, rec: &DiagRecord) -> Result<()> {
        self.records.push(rec.clone());
        Ok(())
    }
}

/// Drive a run from `params` (initial data built from the ic descriptor) to
/// `t_end`, emitting per the schedule. The final step is shortened to land
/// on `t_end` exactly. Deterministic for fixed params and seed.
pub fn run(
    params: &SimParams,
    schedule: &RunSchedule,
    observer: &mut dyn RunObserver,
) -> Result<SimState> {
    params.validate()?;
    let grid = WavenumberGrid::new(params.n)?;
    let (u, b) = ic::make_ic(&params.ic, &grid, params.seed)?;
    let state = SimState::new(u, b);
    run_from(params, state, schedule, observer)
}

/// Same as [`run`] but starting from an existing state (checkpoint resume).
/// The dt schedule continues unchanged, so a resumed trajectory is
/// bit-identical to an uninterrupted one.
pub fn run_from(
    params: &SimParams,
    mut state: SimState,
    schedule: &RunSchedule,
    observer: &mut dyn RunObserver,
) -> Result<SimState> {
    params.validate()?;
    let ctx = OperatorContext::new(state.u.grid(), params.alpha)?;
    let mut stepper = Stepper::new(ctx, params.mu, params.nu, params.integrating_factor);

    let voigt0 = operators::voigt_energy(&state.u, &state.b, params.alpha);
    let budget = diagnostics::EnergyBudget::new(voigt0);
    let mut dissipated = 0.0;

    let emit = |state: &SimState, dissipated: f64, observer: &mut dyn RunObserver| -> Result<()> {
        let rec = diagnostics::record(state, params.alpha, &budget, dissipated, &schedule.hs_extra)?;
        budget.check(&rec)?;
        observer.on_diag(&rec)
    };

    emit(&state, dissipated, observer)?;
    if schedule.snapshot_interval.is_some() {
        observer.on_snapshot(&state)?;
    }

    while state.t < params.t_end {
        let mut dt = match params.dt {
            DtSpec::Fixed(dt) => dt,
            DtSpec::Auto => cfl_dt(&state, params),
        };
        let landing = state.t + dt >= params.t_end;
        if landing {
            dt = params.t_end - state.t;
        }
        let (mut next, dinc) = stepper.step(&state, dt)?;
        if landing {
            next.t = params.t_end;
        }
        dissipated += dinc;
        state = next;

        let at_end = state.t >= params.t_end;
        if state.step_index % schedule.diag_interval == 0 || at_end {
            emit(&state, dissipated, observer)?;
        }
        if let Some(iv) = schedule.snapshot_interval {
            if state.step_index % iv == 0 || at_end {
                observer.on_snapshot(&state)?;
            }
        }
        if let Some(iv) = schedule.checkpoint_interval {
            if state.step_index % iv == 0 || at_end {
                observer.on_checkpoint(&state)?;
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ic::IcKind;
    use std::f64::consts::PI;

    fn grid(n: usize) -> WavenumberGrid {
        WavenumberGrid::new(n).unwrap()
    }

    fn base_params(n: usize) -> SimParams {
        SimParams {
            alpha: 0.1,
            mu: 0.01,
            nu: 0.0,
            n,
            dt: DtSpec::Fixed(1e-3),
            dt_max: 0.05,
            t_end: 0.01,
            cfl_safety: 0.5,
            integrating_factor: true,
            smoothness_horizon: None,
            ic: IcDescriptor::new(vec![IcKind::TaylorGreen]),
            seed: 0,
        }
    }

    #[test]
    fn params_validation() {
        let mut p = base_params(8);
        assert!(p.validate().is_ok());
        p.alpha = -1.0;
        assert!(p.validate().is_err());
        let mut p = base_params(8);
        p.alpha = 0.0;
        p.mu = 0.0;
        assert!(p.validate().is_err());
        p.smoothness_horizon = Some(1.0);
        assert!(p.validate().is_ok());
        p.smoothness_horizon = Some(0.001);
        assert!(p.validate().is_err());
    }

    #[test]
    fn cfl_zero_state_caps_at_dt_max() {
        let g = grid(8);
        let state = SimState::new(SpectralField::zero(&g), SpectralField::zero(&g));
        let p = base_params(8);
        assert_eq!(cfl_dt(&state, &p), p.dt_max);
    }

    #[test]
    fn cfl_matches_recomputed_maxima() {
        let g = grid(32);
        let u = ic::taylor_green(&g, 1.0);
        let b = SpectralField::zero(&g);
        let state = SimState::new(u.clone(), b);
        let p = base_params(32);
        let max_u = u.to_physical().max_norm();
        let want = 0.5 * (1.0 / 32.0) / (max_u + 1e-30);
        let got = cfl_dt(&state, &p);
        assert!((got - want.min(p.dt_max)).abs() < 1e-15);
        // doubling the amplitude halves dt
        let state2 = SimState::new(u.scaled(2.0), SpectralField::zero(&g));
        let got2 = cfl_dt(&state2, &p);
        assert!((got2 - got / 2.0).abs() < 1e-12 * got);
    }

    #[test]
    fn explicit_resistive_restriction_applies_without_if() {
        let g = grid(8);
        let state = SimState::new(SpectralField::zero(&g), SpectralField::zero(&g));
        let mut p = base_params(8);
        p.mu = 1.0;
        p.integrating_factor = false;
        let kmax = g.kappa_max();
        let want = (p.cfl_safety / (p.mu * kmax * kmax)).min(p.dt_max);
        assert!((cfl_dt(&state, &p) - want).abs() < 1e-18);
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = grid(8);
        let ctx = OperatorContext::new(&g, 0.1).unwrap();
        let mut stepper = Stepper::new(ctx, 0.01, 0.0, true);
        let state = SimState::new(SpectralField::zero(&g), SpectralField::zero(&g));
        let (next, dinc) = stepper.step(&state, 1e-2).unwrap();
        assert!(next.u.l2_norm() == 0.0 && next.b.l2_norm() == 0.0);
        assert!(dinc == 0.0);
    }

    #[test]
    fn single_mode_decays_at_heat_kernel_rate() {
        let g = grid(8);
        let mu = 0.01;
        let (u, b) = ic::single_mode_b(&g, [1, 0, 0], [0.0, 1.0, 0.0]).unwrap();
        let ctx = OperatorContext::new(&g, 0.1).unwrap();
        let mut stepper = Stepper::new(ctx, mu, 0.0, true);
        let mut state = SimState::new(u, b);
        let dt = 1e-3;
        for _ in 0..100 {
            state = stepper.step(&state, dt).unwrap().0;
        }
        let factor = (-mu * 4.0 * PI * PI * 0.1).exp();
        let idx = g.index_of([1, 0, 0]);
        let got = state.b.coeff(1, idx).re;
        assert!((got - 0.5 * factor).abs() < 1e-8, "got {got}, want {}", 0.5 * factor);
        assert!(state.u.l2_norm() == 0.0);
    }

    #[test]
    fn elsasser_state_is_steady() {
        let g = grid(16);
        let (u, b) = ic::elsasser(&g, 1.0);
        let ctx = OperatorContext::new(&g, 0.1).unwrap();
        let mut stepper = Stepper::new(ctx, 0.0, 0.0, true);
        let mut state = SimState::new(u.clone(), b);
        for _ in 0..100 {
            state = stepper.step(&state, 1e-2).unwrap().0;
        }
        let drift = state.u.sub(&u).l2_norm() / u.l2_norm();
        assert!(drift <= 1e-10, "drift {drift}");
    }

    #[test]
    fn blowup_is_reported() {
        // enormous dt on a nonlinear state overflows quickly
        let g = grid(8);
        let (u, _) = ic::random_divfree(&g, 4, 2.0, 10.0).unwrap();
        let (b, _) = ic::random_divfree(&g, 5, 2.0, 10.0).unwrap();
        let ctx = OperatorContext::new(&g, 0.0).unwrap();
        let mut stepper = Stepper::new(ctx, 0.0, 0.0, true);
        let mut state = SimState::new(u, b);
        let mut blew_up = false;
        for _ in 0..200 {
            match stepper.step(&state, 10.0) {
                Ok((s, _)) => state = s,
                Err(Error::Blowup { .. }) => {
                    blew_up = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(blew_up);
    }

    #[test]
    fn run_with_zero_t_end_emits_initial_record() {
        let mut p = base_params(8);
        p.t_end = 0.0;
        let mut obs = RecordingObserver::default();
        let state = run(&p, &RunSchedule::default(), &mut obs).unwrap();
        assert_eq!(state.step_index, 0);
        assert_eq!(obs.records.len(), 1);
        assert_eq!(obs.records[0].t, 0.0);
    }

    #[test]
    fn final_time_is_exact() {
        let mut p = base_params(8);
        p.t_end = 0.0105; // not a multiple of dt
        let mut obs = RecordingObserver::default();
        let state = run(&p, &RunSchedule::default(), &mut obs).unwrap();
        assert_eq!(state.t, 0.0105);
        assert_eq!(obs.records.last().unwrap().t, 0.0105);
    }

    #[test]
    fn rerun_is_deterministic() {
        let mut p = base_params(16);
        p.ic = IcDescriptor::new(vec![IcKind::RandomDivfree]);
        p.seed = 9;
        p.t_end = 0.005;
        let mut a = RecordingObserver::default();
        let mut b = RecordingObserver::default();
        let sa = run(&p, &RunSchedule::default(), &mut a).unwrap();
        let sb = run(&p, &RunSchedule::default(), &mut b).unwrap();
        assert_eq!(sa, sb);
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.csv_row(), rb.csv_row());
        }
    }

    #[test]
    fn divergence_stays_small_over_run() {
        let mut p = base_params(16);
        p.ic = IcDescriptor::new(vec![IcKind::TaylorGreen, IcKind::SingleModeB]);
        p.t_end = 0.05;
        let mut obs = RecordingObserver::default();
        let state = run(&p, &RunSchedule::default(), &mut obs).unwrap();
        assert!(state.u.max_divergence() <= 1e-10);
        assert!(state.b.max_divergence() <= 1e-10);
        for rec in &obs.records {
            assert!(rec.div_max_u <= 1e-10 && rec.div_max_b <= 1e-10);
        }
    }
}
