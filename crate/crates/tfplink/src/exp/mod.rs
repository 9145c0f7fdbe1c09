//! Experiment orchestration: config parsing, pipeline wiring, result
//! persistence, and plot-data emission.

pub mod config;
pub mod results;
pub mod runner;

pub use config::{load_config, load_config_str, ExperimentConfig, Profile, SystemKind};
pub use results::{emit_results, ResultRow, RunManifest};
pub use runner::run_experiment;
