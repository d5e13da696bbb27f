//! Config-driven experiment runner.
//!
//! Deterministic by construction: identical configs give byte-identical CSV
//! (modulo the suppressible timestamp line), pass/fail decisions are always
//! a function of the (gap, est_error, margin) triple printed in the same
//! row, and every verify run carries its concentric control.

mod config;
mod experiments;
mod report;

pub use config::{
    default_config, ExperimentConfig, ExperimentKind, FamilySpec, LargeFluxSpec,
    OutputFormat, Resolution,
};
pub use experiments::{
    run_conjecture_probe, run_experiment, run_flux_sweep, run_large_flux,
    run_shape_family, run_shrinking_hole, run_verify_neumann, run_verify_theorem,
};
pub use report::{
    config_hash, Provenance, ReportRow, Summary, VerificationReport, CSV_HEADER,
    CSV_SCHEMA,
};
