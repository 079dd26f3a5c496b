//! Experiment runner for the surfmimo channel model: config parsing, the
//! named figure reproductions, and CSV/JSON output.

pub mod config;
pub mod emit;
pub mod experiments;

pub use config::{ConfigError, ExperimentConfig, NormalizationMode, SpacingRule};
pub use emit::{emit, EmitError, Format};
pub use experiments::{converge, run_named, Experiment, ResultSet, RunError};
