//! IO companion to [`exprtune_core`]: configuration files, report
//! serialization, atomic output writing, and a parallel job runner.
//!
//! Everything the core computes is deterministic given seeds; this crate
//! keeps that property end to end. Reports carry the exact resolved
//! configuration for provenance and contain no timestamps or
//! machine-specific data, so a fixed seed reproduces output files byte for
//! byte at any worker count.

pub mod config;
pub mod io;
pub mod oracle;
pub mod reports;
pub mod runner;

pub use config::{InstanceSpec, TunerConfigFile};
pub use reports::{EliteReportDoc, EvaluationDoc};
