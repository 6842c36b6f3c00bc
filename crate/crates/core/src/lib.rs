//! Pseudo-spectral Galerkin solver for the inviscid resistive MHD-Voigt
//! equations on the periodic unit torus, with exact-identity diagnostics,
//! an α→0 convergence harness, and a blow-up criterion scan.
//!
//! The discretization applies the two-thirds dealiasing rule, so the
//! pseudo-spectral bilinear term coincides with the Galerkin truncation and
//! the analytical identities (trilinear skew-symmetry, the energy law, the
//! a-priori bound) hold to roundoff and are enforced as tests.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod field;
pub mod grid;
pub mod ic;
pub mod operators;
pub mod oracle;
pub mod stepper;

pub use error::{Error, Result};
pub use field::{RealField, SpectralField, SpectralScalar};
pub use grid::WavenumberGrid;
