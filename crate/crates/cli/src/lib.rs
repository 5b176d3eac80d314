//! Command-line front end: runs manifests against scenario files or the
//! built-in examples and writes CSV artifacts with a text report.

pub mod args;
pub mod discrepancy;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod run;

pub use error::{CliError, Result};
pub use manifest::{Command, RunManifest, ScenarioSource};
pub use run::{run, RunSummary};
