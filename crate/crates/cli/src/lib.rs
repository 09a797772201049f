//! Scenario runner: reads a JSON scenario, runs one command against the causalkit engine and
//! writes a deterministic JSON report.

pub mod build;
pub mod commands;
pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::{CliError, EXIT_FAIL, EXIT_NUMERICAL, EXIT_PASS, EXIT_SCHEMA};
pub use report::{Check, Report, Status};
pub use run::{builtins, run, run_path, RunOptions, RunOutcome};
pub use scenario::{Loaded, Scenario};
