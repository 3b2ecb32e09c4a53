//! Experiment orchestration for the purest-state identification lab:
//! configuration files, seeded sweeps, Wilson intervals, invariant suites.

pub mod config;
pub mod stats;
pub mod sweep;
pub mod verify;

use std::path::PathBuf;

pub use config::{ConfigError, EnsembleSource, Experiment, ExperimentConfig};
pub use stats::wilson_interval;
pub use sweep::{run_sweep, SweepResult, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] pqsi_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Domain(String),
}
