//! Configuration documents, log files, the trial harness and reports on top
//! of `roger-core`. The `roger` binary is a thin command-line front end.

pub mod config;
pub mod error;
pub mod harness;
pub mod logio;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
