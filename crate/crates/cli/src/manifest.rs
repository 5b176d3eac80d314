//! Run description shared by every subcommand.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use krotov_lq::{ExampleId, LqProblem};

use crate::error::{CliError, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Enumerate,
    Certify,
    Track,
    Iterate,
    Simulate,
    Example,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Enumerate => "enumerate",
            Command::Certify => "certify",
            Command::Track => "track",
            Command::Iterate => "iterate",
            Command::Simulate => "simulate",
            Command::Example => "example",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scenario file or one of the built-in examples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioSource {
    File(PathBuf),
    Builtin(ExampleId),
}

impl FromStr for ScenarioSource {
    type Err = CliError;

    /// Built-in ids win over files of the same name.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(id) = s.parse::<ExampleId>() {
            return Ok(ScenarioSource::Builtin(id));
        }
        if s.is_empty() {
            return Err(CliError::Manifest("empty scenario".into()));
        }
        Ok(ScenarioSource::File(PathBuf::from(s)))
    }
}

impl fmt::Display for ScenarioSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioSource::File(p) => write!(f, "{}", p.display()),
            ScenarioSource::Builtin(id) => write!(f, "{id}"),
        }
    }
}

impl ScenarioSource {
    pub fn example(&self) -> Option<ExampleId> {
        match self {
            ScenarioSource::Builtin(id) => Some(*id),
            ScenarioSource::File(_) => None,
        }
    }

    pub fn load(&self) -> Result<LqProblem> {
        match self {
            ScenarioSource::Builtin(id) => id.problem().op("model::validate"),
            ScenarioSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| CliError::Read { path: path.clone(), source })?;
                krotov_lq::scenario::parse_scenario(&text)
                    .op("scenario::parse")?
                    .validate()
                    .op("model::validate")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub scenario: ScenarioSource,
    pub dt: f64,
    /// Random Newton starts for the algebraic equation.
    pub starts: usize,
    pub seed: u64,
    /// Newton residual acceptance and iteration stopping threshold.
    pub tol: Option<f64>,
    /// Truncation length of the steady-state feedforward integral.
    pub truncate: Option<f64>,
    pub out_dir: PathBuf,
    /// Simulate with `u = 0` instead of the synthesized law.
    pub open_loop: bool,
}

impl RunManifest {
    pub fn new(command: Command, scenario: ScenarioSource, out_dir: impl AsRef<Path>) -> Self {
        RunManifest {
            command,
            scenario,
            dt: 1e-3,
            starts: 200,
            seed: 0,
            tol: None,
            truncate: None,
            out_dir: out_dir.as_ref().to_path_buf(),
            open_loop: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(CliError::Manifest(format!("dt must be positive, got {}", self.dt)));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(CliError::Manifest(format!("tol must be positive, got {tol}")));
            }
        }
        if let Some(t) = self.truncate {
            if !(t > 0.0) || !t.is_finite() {
                return Err(CliError::Manifest(format!("truncate must be positive, got {t}")));
            }
        }
        if self.command == Command::Example && self.scenario.example().is_none() {
            return Err(CliError::Manifest(format!("{} is not a built-in example", self.scenario)));
        }
        Ok(())
    }
}
