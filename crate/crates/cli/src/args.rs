//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::manifest::{Command, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "krotov-lq", version, about = "LQR/LQT synthesis through quadratic Krotov functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Synthesize the optimal law (algebraic or differential equation).
    Solve(WithScenario),
    /// List every solution of the algebraic equation found by multistart Newton.
    Enumerate(WithScenario),
    /// Check convexity of the equivalent problem along the synthesized function.
    Certify(WithScenario),
    /// Synthesize feedforward and simulate a tracking scenario.
    Track(WithScenario),
    /// Run the iterative improvement scheme from the zero control.
    Iterate(WithScenario),
    /// Simulate the closed loop, or the open loop with --open-loop.
    Simulate {
        #[command(flatten)]
        scenario: WithScenario,
        /// Apply u = 0 instead of the synthesized law.
        #[arg(long)]
        open_loop: bool,
    },
    /// Run everything for a built-in example and compare with published values.
    Example {
        /// ex1 … ex6 or krotov-demo
        id: String,
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Debug, Args)]
pub struct WithScenario {
    /// Scenario file or built-in example id.
    #[arg(long)]
    pub scenario: String,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Args)]
pub struct Options {
    /// Integration step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Random Newton starts.
    #[arg(long, default_value_t = 200)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Newton residual tolerance and iteration stopping threshold.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Truncation length of the steady-state feedforward integral.
    #[arg(long)]
    pub truncate: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl Cli {
    pub fn into_manifest(self) -> Result<RunManifest> {
        let (command, scenario, opts, open_loop) = match self.command {
            Cmd::Solve(s) => (Command::Solve, s.scenario, s.opts, false),
            Cmd::Enumerate(s) => (Command::Enumerate, s.scenario, s.opts, false),
            Cmd::Certify(s) => (Command::Certify, s.scenario, s.opts, false),
            Cmd::Track(s) => (Command::Track, s.scenario, s.opts, false),
            Cmd::Iterate(s) => (Command::Iterate, s.scenario, s.opts, false),
            Cmd::Simulate { scenario, open_loop } => (Command::Simulate, scenario.scenario, scenario.opts, open_loop),
            Cmd::Example { id, opts } => (Command::Example, id, opts, false),
        };
        let mut m = RunManifest::new(command, scenario.parse()?, &opts.out);
        m.dt = opts.dt;
        m.starts = opts.starts;
        m.seed = opts.seed;
        m.tol = opts.tol;
        m.truncate = opts.truncate;
        m.open_loop = open_loop;
        m.validate()?;
        Ok(m)
    }
}
