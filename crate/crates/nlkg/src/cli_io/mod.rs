//! Configuration, experiment drivers, fitting utilities and report output.

pub mod config;
mod experiments;
mod fit;
mod report;

pub use config::{parse_config, parse_config_str, parse_override, Experiment, ExperimentConfig};
pub use experiments::run_experiment;
pub use fit::{linear_fit, loglog_fit, LinearFit, LogLogFit};
pub use report::{write_atomic, write_outputs, Artifact, ExperimentOutput, ExperimentReport, Rule};
