//! Experiment orchestration: configuration, parallel runs with resume,
//! CSV/JSON records and refinement studies.

pub mod config;
mod convergence;
mod experiments;
pub mod record;
mod runner;

pub use config::{preset, ExperimentConfig, ExperimentKind, PRESETS};
pub use convergence::{convergence_study, ConvergenceLevel, ConvergenceReport, SHIFT_TOLERANCE};
pub use record::{Cell, Failure, PointRecord, RunRecord, Verdict};
pub use runner::{run_experiment, run_persisted, CODE_VERSION};
