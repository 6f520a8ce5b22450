//! Experiment runner for `pidcert`: JSON configs in, plot-ready CSV/JSON out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, CliResult};
pub use experiments::{cmd_benchmark, cmd_montecarlo, cmd_stability, cmd_sweep, cmd_tune, cmd_windup};
