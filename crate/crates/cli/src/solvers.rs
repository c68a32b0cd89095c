//! Solver selection and the options shared by every command.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use cpm_core::baselines::{run_baseline, BaselineConfig, BaselineKind};
use cpm_core::game::make_normal_form_spec;
use cpm_core::solver::{run_centralized, run_cmwu, run_decentralized};
use cpm_core::{EtaChoice, InnerMode, NormalFormGame, ProximalSetup, RunTrace, SolverConfig, ToleranceSchedule};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Cpm,
    CpmDecentralized,
    Cmwu,
    Mwu,
    Omwu,
    MirrorProx,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Cpm => "cpm",
            SolverKind::CpmDecentralized => "cpm-decentralized",
            SolverKind::Cmwu => "cmwu",
            SolverKind::Mwu => "mwu",
            SolverKind::Omwu => "omwu",
            SolverKind::MirrorProx => "mirror-prox",
        }
    }

    /// Whether the constant-regret guarantee of the prox method applies.
    pub fn is_prox_method(self) -> bool {
        matches!(self, SolverKind::Cpm | SolverKind::CpmDecentralized | SolverKind::Cmwu)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `auto`, a step size, or `c/L` for a multiple of the inverse Lipschitz
/// constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaArg {
    Auto,
    Value(f64),
    OverL(f64),
}

impl FromStr for EtaArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let positive = |v: &str| match v.trim().parse::<f64>() {
            Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
            _ => Err(format!("expected auto, a positive number or c/L, got {s:?}")),
        };
        if s == "auto" {
            Ok(EtaArg::Auto)
        } else if let Some(c) = s.strip_suffix("/L") {
            positive(c).map(EtaArg::OverL)
        } else {
            positive(s).map(EtaArg::Value)
        }
    }
}

impl EtaArg {
    pub fn resolve(self, lipschitz: f64) -> EtaChoice {
        match self {
            EtaArg::Auto => EtaChoice::Auto,
            EtaArg::Value(v) => EtaChoice::Fixed(v),
            EtaArg::OverL(c) => EtaChoice::Fixed(c / lipschitz),
        }
    }
}

/// `inv-t2` or `const:<v>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsSchedule(pub ToleranceSchedule);

impl FromStr for EpsSchedule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "inv-t2" {
            return Ok(EpsSchedule(ToleranceSchedule::InverseSquare));
        }
        match s.strip_prefix("const:").map(|v| v.parse::<f64>()) {
            Some(Ok(v)) if v.is_finite() && v > 0.0 => Ok(EpsSchedule(ToleranceSchedule::Constant(v))),
            _ => Err(format!("expected inv-t2 or const:<positive number>, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InnerModeArg {
    Residual,
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub eta: EtaArg,
    pub eps: EpsSchedule,
    pub inner_mode: InnerModeArg,
    pub outer_iterations: usize,
    pub max_inner: Option<usize>,
    /// Clamp prox-method steps to `1/(2L)`.
    pub clamp_eta: bool,
}

impl RunOptions {
    pub fn solver_config(&self, lipschitz: f64) -> SolverConfig {
        let config = SolverConfig::new(self.outer_iterations);
        let config = match self.max_inner {
            Some(cap) => config.with_max_inner(cap),
            None => config,
        };
        config
            .with_eta(self.eta.resolve(lipschitz))
            .with_tolerance(self.eps.0)
            .with_inner_mode(match self.inner_mode {
                InnerModeArg::Residual => InnerMode::ResidualCheck,
                InnerModeArg::Budget => InnerMode::FixedBudget,
            })
            .with_clamp_eta(self.clamp_eta)
    }
}

pub fn run_solver(game: &NormalFormGame, solver: SolverKind, opts: &RunOptions) -> Result<RunTrace> {
    if opts.outer_iterations == 0 {
        return Err(CliError::Usage("--T must be at least 1".into()));
    }
    let spec = make_normal_form_spec(game.clone());
    let setup = ProximalSetup::for_spec(&spec)?;
    let config = opts.solver_config(spec.lipschitz());
    let baseline = |kind| {
        let cfg = BaselineConfig::new(kind, opts.outer_iterations).with_eta(opts.eta.resolve(spec.lipschitz()));
        run_baseline(&setup, &spec, &cfg)
    };
    Ok(match solver {
        SolverKind::Cpm => run_centralized(&setup, &spec, &config)?,
        SolverKind::CpmDecentralized => run_decentralized(&setup, &spec, &config)?,
        SolverKind::Cmwu => run_cmwu(game, &config)?,
        SolverKind::Mwu => baseline(BaselineKind::Mwu)?,
        SolverKind::Omwu => baseline(BaselineKind::OptimisticMwu)?,
        SolverKind::MirrorProx => baseline(BaselineKind::MirrorProx)?,
    })
}
