use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}^3 vs {1}^3")]
    GridMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical blow-up at step {step} (t = {t})")]
    Blowup { step: u64, t: f64 },

    #[error(
        "energy budget violated at t = {t}: {lhs:.6e} exceeds {bound:.6e} + {tol:.3e} \
         (integrator misconfigured; reduce dt)"
    )]
    BoundViolated { t: f64, lhs: f64, bound: f64, tol: f64 },

    #[error("reference solution lost smoothness before T — shrink T ({0})")]
    ReferenceLost(String),

    #[error("{0}")]
    Callback(String),
}

pub type Result<T> = std::result::Result<T, Error>;
