//! Config-driven experiment runner over `hermite_core`.

pub mod config;
pub mod output;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use report::emit_report;
pub use runner::{run_experiment, RunOutcome};
pub use verify::{run_suite, select, SuiteReport};
