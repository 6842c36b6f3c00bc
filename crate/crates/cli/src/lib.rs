//! IO layer for the MHD-Voigt solver: run configuration, binary snapshots,
//! and report serialization.

pub mod config;
pub mod report;
pub mod snapshot;
