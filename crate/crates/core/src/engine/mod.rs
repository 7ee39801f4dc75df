//! Deterministic discrete-time scenario runner.
//!
//! One scenario is a single sequential timeline driven at the control rate.
//! All randomness derives from the scenario seed, so a config always
//! produces the same records no matter how many scenarios run alongside it.

pub mod config;
mod run;
mod summary;
pub mod trajectory;

use thiserror::Error;

pub use config::{ConfigIssue, ScenarioConfig};
pub use run::{
    compare_modes, run_built, run_scenario, AntennaMode, CameraMount, Comparison, ComparisonRow, DetectionRow,
    RunOutput, Scenario, StepRecord, TrackRow,
};
pub use summary::{percentile, summarize, summarize_with, PowerAveraging, Summary};
pub use trajectory::{advance_trajectory, TrajectorySpec};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid scenario config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigIssue>),
    #[error(transparent)]
    Model(#[from] crate::Error),
}
