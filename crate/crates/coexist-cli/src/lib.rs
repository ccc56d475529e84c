//! Experiment orchestration around `coexist-core`: JSON experiment specs,
//! figure-reproduction sweeps, parallel Monte Carlo execution, and
//! deterministic CSV/JSON emission.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ExperimentKind, ExperimentSpec, Overrides, DEFAULT_SEED};
pub use runner::{execute, par_report, RunError, RunOutcome};
