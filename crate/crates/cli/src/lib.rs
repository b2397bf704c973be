//! Command-line workbench: configuration, experiment orchestration and report
//! emission on top of the `levydraw` library.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod experiment;
pub mod report;

pub use commands::{dispatch, Cli};
pub use config::{ConfigError, ExperimentConfig};
pub use experiment::run_experiment;
pub use report::VerificationReport;
