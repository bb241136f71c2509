//! Config-driven experiments on top of `sse-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{ExperimentConfig, ModeSpec};
pub use error::{CliError, CliResult};
