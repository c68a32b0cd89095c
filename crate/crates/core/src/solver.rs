//! Conceptual prox method with approximate fixed points.
//!
//! Each outer step `t` looks for an approximate fixed point `w^t` of the map
//! `T(w) = prox(z^{t-1}, eta F(w))`, which is an `eta L` contraction, and then
//! sets `z^t = T(w^t)`. The regret of every player along `w^1, w^2, ...` is
//! bounded by `(1/eta) max D_i(. || z_i^0) + B sum_t eps^t` regardless of `T`.
//!
//! Three drivers share that recursion:
//! - [`run_centralized`] iterates `T` on the joint space, either until the
//!   measured residual is below `eps^t` or for a fixed number of rounds.
//! - [`run_decentralized`] unrolls the fixed-round variant into per-player
//!   OMD steps that all read the same previous profile (Clairvoyant OMD).
//! - [`run_cmwu`] is the decentralized driver for normal-form games with the
//!   multiplicative closed form (Clairvoyant MWU).

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{ConvergenceFailure, CpmError, Result};
use crate::game::{make_normal_form_spec, GameSpec, NormalFormGame};
use crate::math;
use crate::point::{BlockVec, JointPoint};
use crate::proximal::{softmax, ProximalSetup, MIN_PROB};
use crate::trace::{Algorithm, OuterIterate, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaChoice {
    /// `1 / (2L)`.
    Auto,
    Fixed(f64),
}

/// Fixed-point tolerance `eps^t` for outer step `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToleranceSchedule {
    /// `1 / t^2`; the errors sum to less than 2.
    InverseSquare,
    Constant(f64),
}

impl ToleranceSchedule {
    pub fn eps(&self, t: usize) -> f64 {
        match self {
            ToleranceSchedule::InverseSquare => {
                let t = t.max(1) as f64;
                1.0 / (t * t)
            }
            ToleranceSchedule::Constant(v) => *v,
        }
    }

    pub fn sum(&self, horizon: usize) -> f64 {
        (1..=horizon).map(|t| self.eps(t)).sum()
    }

    fn validate(&self) -> Result<()> {
        match self {
            ToleranceSchedule::Constant(v) if !(v.is_finite() && *v > 0.0) => {
                Err(CpmError::config(format!("constant tolerance must be positive, got {v}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerMode {
    /// Iterate until the measured residual is at most `eps^t`.
    ResidualCheck,
    /// Apply the map exactly `N^t` times (see [`compute_inner_budget`]).
    FixedBudget,
    /// Apply the map exactly this many times every outer step.
    FixedRounds(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub eta: EtaChoice,
    pub tolerance: ToleranceSchedule,
    pub outer_iterations: usize,
    pub inner_mode: InnerMode,
    /// Defaults to the centre of every domain (uniform on simplices).
    pub initial_point: Option<JointPoint>,
    /// Cap on inner map applications; defaults to `10 N^t`.
    pub max_inner: Option<usize>,
    /// Clamp a requested step above `1/(2L)` down to it. Turning this off is
    /// only useful for probing what happens when the map is not a
    /// contraction.
    pub clamp_eta: bool,
}

impl SolverConfig {
    pub fn new(outer_iterations: usize) -> Self {
        Self {
            eta: EtaChoice::Auto,
            tolerance: ToleranceSchedule::InverseSquare,
            outer_iterations,
            inner_mode: InnerMode::ResidualCheck,
            initial_point: None,
            max_inner: None,
            clamp_eta: true,
        }
    }

    pub fn with_eta(mut self, eta: EtaChoice) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_tolerance(mut self, tolerance: ToleranceSchedule) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_inner_mode(mut self, mode: InnerMode) -> Self {
        self.inner_mode = mode;
        self
    }

    pub fn with_initial_point(mut self, z0: JointPoint) -> Self {
        self.initial_point = Some(z0);
        self
    }

    pub fn with_max_inner(mut self, max_inner: usize) -> Self {
        self.max_inner = Some(max_inner);
        self
    }

    pub fn with_clamp_eta(mut self, clamp: bool) -> Self {
        self.clamp_eta = clamp;
        self
    }

    /// Returns `(requested, effective)` step sizes for Lipschitz constant `L`.
    pub fn resolve_eta(&self, lipschitz: f64) -> Result<(f64, f64)> {
        let cap = 1.0 / (2.0 * lipschitz);
        match self.eta {
            EtaChoice::Auto => Ok((cap, cap)),
            EtaChoice::Fixed(eta) if !(eta.is_finite() && eta > 0.0) => {
                Err(CpmError::config(format!("step size must be positive, got {eta}")))
            }
            EtaChoice::Fixed(eta) if self.clamp_eta && eta > cap => Ok((eta, cap)),
            EtaChoice::Fixed(eta) => Ok((eta, eta)),
        }
    }

    fn initial(&self, setup: &ProximalSetup) -> Result<JointPoint> {
        match &self.initial_point {
            Some(z0) => {
                z0.check_dims(&setup.dims(), "initial point")?;
                if !setup.contains(z0, 1e-9) {
                    return Err(CpmError::config("initial point is not feasible"));
                }
                Ok(z0.clone())
            }
            None => Ok(setup.center_point()),
        }
    }
}

/// `N = ceil(1 + log2(diameter) + log2(1/eps))`, at least 1.
///
/// After `N - 1` applications of a `1/2`-contraction started anywhere in the
/// domain the residual is at most `eps`.
pub fn compute_inner_budget(setup: &ProximalSetup, eps: f64) -> usize {
    inner_budget_for_diameter(setup.domain_diameter(), eps)
}

pub fn inner_budget_for_diameter(diameter: f64, eps: f64) -> usize {
    let diameter = diameter.max(f64::MIN_POSITIVE);
    let n = math::ceil(1.0 + math::log2(diameter) + math::log2(1.0 / eps));
    if n.is_finite() && n > 1.0 {
        n as usize
    } else {
        1
    }
}

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    /// Approximate fixed point.
    pub w: JointPoint,
    /// `prox(z_prev, eta F(w))`, already computed during the last check.
    pub z: JointPoint,
    /// `grad_{x_i} u_i(w)` for every player, i.e. `-F(w)`.
    pub gradients: BlockVec,
    /// Map applications, including the one yielding `z`.
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

fn negate(v: &BlockVec) -> BlockVec {
    v.scaled(-1.0)
}

/// Fixed-point iteration on `w -> prox(z_prev, eta F(w))` starting from
/// `w = z_prev`, stopping once `||w - prox(z_prev, eta F(w))|| <= eps`.
///
/// Converges geometrically when `eta L < 1`. Fails with a convergence error,
/// carrying the best iterate seen, if `max_inner` applications are not
/// enough.
pub fn inner_fixed_point(
    setup: &ProximalSetup,
    spec: &GameSpec,
    z_prev: &JointPoint,
    eta: f64,
    eps: f64,
    max_inner: usize,
) -> Result<InnerSolution> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(CpmError::config(format!("tolerance must be positive, got {eps}")));
    }
    let mut w = z_prev.clone();
    let mut history = Vec::new();
    let mut best: Option<(f64, JointPoint)> = None;
    for k in 1..=max_inner.max(1) {
        let f = spec.operator(&w)?;
        let p = setup.prox(z_prev, &f, eta)?;
        let r = setup.primal_norm(&w.sub(&p));
        history.push(r);
        if r <= eps {
            return Ok(InnerSolution {
                w,
                z: p,
                gradients: negate(&f),
                iterations: k,
                residual: r,
                residual_history: history,
            });
        }
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, w));
        }
        w = p;
    }
    let (residual, best) = best.expect("at least one iteration ran");
    Err(CpmError::Convergence(Box::new(ConvergenceFailure {
        outer: 0,
        iterations: history.len(),
        residual,
        tolerance: eps,
        best,
        partial_trace: None,
    })))
}

/// `rounds - 1` map applications from `z_prev`, then one more for `z`.
fn fixed_rounds(
    setup: &ProximalSetup,
    spec: &GameSpec,
    z_prev: &JointPoint,
    eta: f64,
    rounds: usize,
) -> Result<(JointPoint, JointPoint, BlockVec)> {
    let mut w = z_prev.clone();
    for _ in 1..rounds {
        let f = spec.operator(&w)?;
        w = setup.prox(z_prev, &f, eta)?;
    }
    let f = spec.operator(&w)?;
    let z = setup.prox(z_prev, &f, eta)?;
    Ok((w, z, negate(&f)))
}

struct Prepared {
    setup_diameter: f64,
    eta_requested: f64,
    eta: f64,
    z0: JointPoint,
}

fn prepare(setup: &ProximalSetup, spec: &GameSpec, config: &SolverConfig) -> Result<Prepared> {
    if setup.dims() != spec.dims() {
        return Err(CpmError::shape(format!(
            "setup has dimensions {:?} but the game has {:?}",
            setup.dims(),
            spec.dims()
        )));
    }
    config.tolerance.validate()?;
    if let InnerMode::FixedRounds(0) = config.inner_mode {
        return Err(CpmError::config("fixed rounds must be at least 1"));
    }
    let (eta_requested, eta) = config.resolve_eta(spec.lipschitz())?;
    Ok(Prepared { setup_diameter: setup.domain_diameter(), eta_requested, eta, z0: config.initial(setup)? })
}

fn rounds_for(mode: InnerMode, diameter: f64, eps: f64) -> usize {
    match mode {
        InnerMode::FixedRounds(n) => n,
        _ => inner_budget_for_diameter(diameter, eps),
    }
}

fn at_iteration(outer: usize, err: CpmError, trace: &RunTrace) -> CpmError {
    match err {
        CpmError::Convergence(mut failure) => {
            failure.outer = outer;
            failure.partial_trace = Some(trace.clone());
            CpmError::Convergence(failure)
        }
        other => CpmError::AtIteration { outer, source: Box::new(other) },
    }
}

/// Centralized prox method with approximate fixed points.
pub fn run_centralized(setup: &ProximalSetup, spec: &GameSpec, config: &SolverConfig) -> Result<RunTrace> {
    let prep = prepare(setup, spec, config)?;
    let eta = prep.eta;
    let contraction = eta * spec.lipschitz();
    let mut trace = RunTrace::new(Algorithm::Cpm, setup.domains().to_vec(), prep.eta_requested, eta, prep.z0.clone());
    let mut z_prev = prep.z0;
    for t in 1..=config.outer_iterations {
        let eps = config.tolerance.eps(t);
        let iterate = match config.inner_mode {
            InnerMode::ResidualCheck => {
                let cap = config.max_inner.unwrap_or_else(|| 10 * inner_budget_for_diameter(prep.setup_diameter, eps));
                let sol =
                    inner_fixed_point(setup, spec, &z_prev, eta, eps, cap).map_err(|e| at_iteration(t, e, &trace))?;
                OuterIterate {
                    t,
                    w: sol.w,
                    z: sol.z,
                    gradients: sol.gradients,
                    inner_iterations: sol.iterations,
                    prox_evaluations: sol.iterations,
                    residual: sol.residual,
                    residual_is_bound: false,
                    residual_history: sol.residual_history,
                    eps,
                }
            }
            mode => {
                let rounds = rounds_for(mode, prep.setup_diameter, eps);
                let (w, z, gradients) =
                    fixed_rounds(setup, spec, &z_prev, eta, rounds).map_err(|e| at_iteration(t, e, &trace))?;
                OuterIterate {
                    t,
                    w,
                    z,
                    gradients,
                    inner_iterations: rounds,
                    prox_evaluations: rounds,
                    residual: residual_bound(contraction, prep.setup_diameter, rounds),
                    residual_is_bound: true,
                    residual_history: Vec::new(),
                    eps,
                }
            }
        };
        z_prev = iterate.z.clone();
        trace.push(iterate);
    }
    Ok(trace)
}

/// Residual of `T^{rounds-1}(z_prev)` is at most `q^{rounds-1} * diameter`.
fn residual_bound(contraction: f64, diameter: f64, rounds: usize) -> f64 {
    math::powf(contraction, rounds.saturating_sub(1) as f64) * diameter
}

/// Per-player block update used by the decentralized drivers.
trait BlockStep {
    fn step(&self, player: usize, center: &[f64], gradient: &[f64], eta: f64) -> Result<Vec<f64>>;
}

/// Generic OMD step: `argmin -eta <grad u_i, x> + D_i(x || center)`.
struct ProxStep<'a>(&'a ProximalSetup);

impl BlockStep for ProxStep<'_> {
    fn step(&self, player: usize, center: &[f64], gradient: &[f64], eta: f64) -> Result<Vec<f64>> {
        let loss: Vec<f64> = gradient.iter().map(|g| -g).collect();
        self.0.prox_block(player, center, &loss, eta)
    }
}

/// Multiplicative closed form `x[a] ~ center[a] exp(eta grad[a])`.
struct MultiplicativeStep;

impl BlockStep for MultiplicativeStep {
    fn step(&self, _player: usize, center: &[f64], gradient: &[f64], eta: f64) -> Result<Vec<f64>> {
        if gradient.iter().any(|g| !g.is_finite()) {
            return Err(CpmError::input("utility gradient has non-finite entries"));
        }
        if gradient.iter().all(|&g| g == 0.0) {
            return Ok(center.to_vec());
        }
        let logits: Vec<f64> =
            center.iter().zip(gradient).map(|(&c, &g)| math::ln(c.max(MIN_PROB)) + eta * g).collect();
        Ok(softmax(&logits))
    }
}

fn run_unrolled(
    algorithm: Algorithm,
    setup: &ProximalSetup,
    spec: &GameSpec,
    config: &SolverConfig,
    stepper: &dyn BlockStep,
) -> Result<RunTrace> {
    let prep = prepare(setup, spec, config)?;
    let eta = prep.eta;
    let contraction = eta * spec.lipschitz();
    let n = spec.num_players();
    let mut trace = RunTrace::new(algorithm, setup.domains().to_vec(), prep.eta_requested, eta, prep.z0.clone());
    let mut z_prev = prep.z0;
    for t in 1..=config.outer_iterations {
        let eps = config.tolerance.eps(t);
        let rounds = rounds_for(config.inner_mode, prep.setup_diameter, eps);
        let mut w = z_prev.clone();
        let mut regret_bearing = None;
        for k in 1..=rounds {
            // every player reads the same profile `w` from the previous round
            let gradients = (0..n)
                .map(|i| spec.gradient(i, &w))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| at_iteration(t, e, &trace))?;
            let next = (0..n)
                .map(|i| stepper.step(i, z_prev.block(i), &gradients[i], eta))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| at_iteration(t, e, &trace))?;
            if k == rounds {
                regret_bearing = Some((w, BlockVec::new(gradients)));
                w = JointPoint::new(next);
                break;
            }
            w = JointPoint::new(next);
        }
        let (w_t, gradients) = regret_bearing.expect("rounds >= 1");
        let iterate = OuterIterate {
            t,
            w: w_t,
            z: w.clone(),
            gradients,
            inner_iterations: rounds,
            prox_evaluations: rounds,
            residual: residual_bound(contraction, prep.setup_diameter, rounds),
            residual_is_bound: true,
            residual_history: Vec::new(),
            eps,
        };
        z_prev = w;
        trace.push(iterate);
    }
    Ok(trace)
}

/// Clairvoyant OMD: the fixed-round prox method unrolled into simultaneous
/// per-player OMD steps. `ResidualCheck` is treated as `FixedBudget`.
///
/// The recorded regret-bearing iterate of step `t` is the profile after
/// `N^t - 1` rounds, whose simultaneous update produces `z^t`.
pub fn run_decentralized(setup: &ProximalSetup, spec: &GameSpec, config: &SolverConfig) -> Result<RunTrace> {
    run_unrolled(Algorithm::CpmDecentralized, setup, spec, config, &ProxStep(setup))
}

/// Clairvoyant MWU on a normal-form game with entropy on every simplex,
/// using the multiplicative closed form for each block update.
pub fn run_cmwu(game: &NormalFormGame, config: &SolverConfig) -> Result<RunTrace> {
    let spec = make_normal_form_spec(game.clone());
    let setup = ProximalSetup::for_spec(&spec)?;
    run_unrolled(Algorithm::Cmwu, &setup, &spec, config, &MultiplicativeStep)
}
