//! Experiment driver for `absum-core`: JSON configs in, JSON and CSV
//! reports out, plus the `verify-all` invariant suite.

pub mod config;
pub mod error;
pub mod families;
pub mod report;
pub mod run;
pub mod verify;

pub use config::{Command, ExperimentConfig, Scale};
pub use error::CliError;
pub use run::{run, Outcome};
