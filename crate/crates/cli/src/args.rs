use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::game_file::{load_game, RandomSpec};
use crate::solvers::{EpsSchedule, EtaArg, InnerModeArg, RunOptions, SolverKind};
use cpm_core::NormalFormGame;

#[derive(Debug, Parser)]
#[command(name = "cpm", version, about = "Prox-method learning dynamics for normal-form games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver and write its per-iteration trace and a summary.
    Run(RunArgs),
    /// Prox evaluations each solver needs to reach every target CCE gap.
    Bench(BenchArgs),
    /// Check the solver's guarantees numerically on a game.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GameSource {
    /// JSON game file.
    #[arg(long, value_name = "PATH")]
    pub game: Option<PathBuf>,
    /// Random game with payoffs uniform in [-V, V].
    #[arg(long, value_name = "n:d1,d2,...:V:seed")]
    pub random: Option<String>,
}

impl GameSource {
    pub fn load(&self) -> Result<NormalFormGame> {
        match (&self.game, &self.random) {
            (Some(path), _) => load_game(path),
            (None, Some(spec)) => RandomSpec::parse(spec)?.generate(),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Step size: `auto`, a number, or `c/L`.
    #[arg(long, default_value = "auto")]
    pub eta: EtaArg,
    /// Fixed-point tolerance schedule: `inv-t2` or `const:<v>`.
    #[arg(long = "eps-schedule", default_value = "inv-t2")]
    pub eps_schedule: EpsSchedule,
    #[arg(long = "inner-mode", value_enum, default_value = "residual")]
    pub inner_mode: InnerModeArg,
    /// Outer iterations.
    #[arg(long = "T", default_value_t = 1000)]
    pub outer_iterations: usize,
    /// Cap on inner map applications per outer step in residual mode
    /// (default ten times the inner budget).
    #[arg(long = "max-inner")]
    pub max_inner: Option<usize>,
}

impl SolverArgs {
    pub fn options(&self, clamp_eta: bool) -> RunOptions {
        RunOptions {
            eta: self.eta,
            eps: self.eps_schedule,
            inner_mode: self.inner_mode,
            outer_iterations: self.outer_iterations,
            max_inner: self.max_inner,
            clamp_eta,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: GameSource,
    #[arg(long, value_enum, default_value = "cpm")]
    pub solver: SolverKind,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Trace CSV path; the summary goes next to it as `<stem>.summary.json`.
    /// Without it the trace is printed to stdout and the summary to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compute the CCE gap every this many outer iterations.
    #[arg(long, default_value_t = 10)]
    pub cadence: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: GameSource,
    /// Solvers to compare, comma separated or repeated.
    #[arg(long = "solver", value_enum, value_delimiter = ',', required = true, num_args = 1..)]
    pub solvers: Vec<SolverKind>,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Target CCE gaps.
    #[arg(long = "eps-grid", value_delimiter = ',', default_value = "0.1,0.01")]
    pub eps_grid: Vec<f64>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: GameSource,
    /// One of the prox-method solvers.
    #[arg(long, value_enum, default_value = "cpm")]
    pub solver: SolverKind,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Seed for the sampled checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random samples per prox and operator check.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Random comparators per player and outer step.
    #[arg(long, default_value_t = 100)]
    pub comparators: usize,
}
