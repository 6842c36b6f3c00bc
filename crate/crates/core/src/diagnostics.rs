//! Conserved/bounded quantities, identity residuals, blow-up indicator, and
//! the two-run continuous-dependence check.

use crate::error::{Error, Result};
use crate::experiments;
use crate::operators::{self, OperatorContext};
use crate::stepper::{SimParams, SimState, Stepper};
use crate::field::SpectralField;

/// One sampling instant. `energy_residual` closes the budget
/// `voigt(t) − voigt(0) + dissipated(t)`, which the semi-discrete system
/// holds at zero and RK4 perturbs at O(dt⁴·t).
#[derive(Debug, Clone)]
pub struct DiagRecord {
    pub t: f64,
    pub l2_u: f64,
    pub v_u: f64,
    pub l2_b: f64,
    pub v_b: f64,
    pub voigt_energy: f64,
    pub dissipated: f64,
    pub energy_residual: f64,
    /// α²‖u‖², the quantity whose α→0 limit signals singularity formation.
    pub blowup_indicator: f64,
    pub hs_u_2: f64,
    pub hs_u_3: f64,
    pub hs_b_2: f64,
    pub hs_b_3: f64,
    /// Additional monitored indices beyond the fixed CSV set: `(s, H^s(u), H^s(B))`.
    pub hs_extra: Vec<(f64, f64, f64)>,
    pub div_max_u: f64,
    pub div_max_b: f64,
}

pub const CSV_HEADER: &str = "t,l2_u,v_u,l2_B,v_B,voigt_energy,dissipated,energy_residual,\
blowup_indicator,hs_u_2,hs_u_3,hs_B_2,hs_B_3,div_max_u,div_max_B";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

impl DiagRecord {
    /// Fixed 15-column row, floats at 17 significant digits.
    pub fn csv_row(&self) -> String {
        [
            self.t,
            self.l2_u,
            self.v_u,
            self.l2_b,
            self.v_b,
            self.voigt_energy,
            self.dissipated,
            self.energy_residual,
            self.blowup_indicator,
            self.hs_u_2,
            self.hs_u_3,
            self.hs_b_2,
            self.hs_b_3,
            self.div_max_u,
            self.div_max_b,
        ]
        .map(fmt)
        .join(",")
    }
}

/// Initial Voigt energy `(K¹_α)²` and the a-priori tolerance it implies.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBudget {
    pub initial: f64,
    pub tol_rel: f64,
}

impl EnergyBudget {
    pub fn new(initial: f64) -> Self {
        Self { initial, tol_rel: 1e-8 }
    }

    /// Enforce `voigt(t) + dissipated(t) ≤ (K¹_α)² + tol`.
    pub fn check(&self, rec: &DiagRecord) -> Result<()> {
        let lhs = rec.voigt_energy + rec.dissipated;
        let tol = self.tol_rel * self.initial;
        if lhs > self.initial + tol {
            return Err(Error::BoundViolated { t: rec.t, lhs, bound: self.initial, tol });
        }
        Ok(())
    }
}

/// Populate one record from a state and the running dissipation.
pub fn record(
    state: &SimState,
    alpha: f64,
    budget: &EnergyBudget,
    dissipated: f64,
    hs_extra: &[f64],
) -> Result<DiagRecord> {
    let l2_u = state.u.l2_norm();
    let v_u = operators::v_norm(&state.u);
    let l2_b = state.b.l2_norm();
    let v_b = operators::v_norm(&state.b);
    let voigt = alpha * alpha * v_u * v_u + l2_u * l2_u + l2_b * l2_b;
    let extra = hs_extra
        .iter()
        .map(|&s| {
            Ok((s, operators::sobolev_norm(&state.u, s)?, operators::sobolev_norm(&state.b, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagRecord {
        t: state.t,
        l2_u,
        v_u,
        l2_b,
        v_b,
        voigt_energy: voigt,
        dissipated,
        energy_residual: voigt - budget.initial + dissipated,
        blowup_indicator: alpha * alpha * v_u * v_u,
        hs_u_2: operators::sobolev_norm(&state.u, 2.0)?,
        hs_u_3: operators::sobolev_norm(&state.u, 3.0)?,
        hs_b_2: operators::sobolev_norm(&state.b, 2.0)?,
        hs_b_3: operators::sobolev_norm(&state.b, 3.0)?,
        hs_extra: extra,
        div_max_u: state.u.max_divergence(),
        div_max_b: state.b.max_divergence(),
    })
}

/// Side-by-side evolution of two initial states under identical parameters,
/// tracking `δE(t) = |δu|² + α²‖δu‖² + |δB|²` and its least-squares
/// exponential rate.
#[derive(Debug, Clone)]
pub struct PerturbationReport {
    pub ts: Vec<f64>,
    pub delta_energy: Vec<f64>,
    /// Least-squares rate c in `δE(t) ≈ δE(0)·e^{ct}` (0 when δE ≡ 0).
    pub rate: f64,
    /// max over samples of `δE(t) / (δE(0)·e^{ct})` (1 when δE ≡ 0).
    pub envelope_excess: f64,
}

pub fn delta_energy(a: &SimState, b: &SimState, alpha: f64) -> f64 {
    let du = a.u.sub(&b.u);
    let db = a.b.sub(&b.b);
    du.l2_norm().powi(2) + alpha * alpha * operators::v_norm(&du).powi(2) + db.l2_norm().powi(2)
}

/// Run the pair `(ic_a, ic_b)` to time `t_end`, sampling every
/// `sample_every` steps.
pub fn continuous_dependence_check(
    params: &SimParams,
    ic_a: (SpectralField, SpectralField),
    ic_b: (SpectralField, SpectralField),
    sample_every: u64,
) -> Result<PerturbationReport> {
    params.validate()?;
    let dt = match params.dt {
        crate::stepper::DtSpec::Fixed(dt) => dt,
        crate::stepper::DtSpec::Auto => {
            return Err(Error::InvalidParameter(
                "continuous dependence check requires a fixed dt".into(),
            ))
        }
    };
    let grid = ic_a.0.grid().clone();
    let ctx = OperatorContext::new(&grid, params.alpha)?;
    let mut stepper = Stepper::new(ctx, params.mu, params.nu, params.integrating_factor);
    let mut sa = SimState::new(ic_a.0, ic_a.1);
    let mut sb = SimState::new(ic_b.0, ic_b.1);

    let mut ts = vec![0.0];
    let mut de = vec![delta_energy(&sa, &sb, params.alpha)];
    while sa.t < params.t_end {
        let mut h = dt;
        if sa.t + h >= params.t_end {
            h = params.t_end - sa.t;
        }
        let (na, _) = stepper.step(&sa, h)?;
        let (nb, _) = stepper.step(&sb, h)?;
        sa = na;
        sb = nb;
        if sa.step_index % sample_every == 0 || sa.t >= params.t_end {
            ts.push(sa.t);
            de.push(delta_energy(&sa, &sb, params.alpha));
        }
    }

    // identical trajectories: δE ≡ 0, rate 0 by convention
    if de.iter().all(|&v| v == 0.0) {
        return Ok(PerturbationReport { ts, delta_energy: de, rate: 0.0, envelope_excess: 1.0 });
    }
    let de0 = de[0];
    if de0 <= 0.0 {
        return Err(Error::InvalidParameter(
            "continuous dependence check requires a nonzero initial difference".into(),
        ));
    }
    // least squares on ln δE vs t
    let lny: Vec<f64> = de.iter().map(|&v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = experiments::linear_fit(&ts, &lny)?;
    let rate = fit.slope;
    let mut excess = 0.0f64;
    for (&t, &v) in ts.iter().zip(&de) {
        let envelope = de0 * (rate * t).exp();
        excess = excess.max(v / envelope);
    }
    Ok(PerturbationReport { ts, delta_energy: de, rate, envelope_excess: excess })
}
