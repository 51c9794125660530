//! Files, command line and parallel Monte Carlo around `peres_core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod log_csv;
pub mod parallel;
pub mod report;

pub use config::RunConfig;
pub use error::{BenchError, Result};
