//! Experiment runner around `ofdmcr-core`: configuration files, parallel
//! Monte Carlo, CSV output and SVG plots.

pub mod config;
pub mod error;
pub mod experiments;
pub mod harness;
pub mod output;
pub mod plot;
pub mod selftest;

pub use config::{parse_config, Experiment, ExperimentSpec};
pub use error::CliError;
pub use experiments::{run_and_write, run_experiment, RunOutcome};
