//! Comparison learners producing the same [`RunTrace`] format: online mirror
//! descent (MWU on simplices), its optimistic variant, and mirror prox.

use alloc::format;

use crate::error::{CpmError, Result};
use crate::game::GameSpec;
use crate::math;
use crate::point::{BlockVec, JointPoint};
use crate::proximal::ProximalSetup;
use crate::solver::EtaChoice;
use crate::trace::{Algorithm, OuterIterate, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Mwu,
    OptimisticMwu,
    MirrorProx,
}

impl BaselineKind {
    fn algorithm(self) -> Algorithm {
        match self {
            BaselineKind::Mwu => Algorithm::Mwu,
            BaselineKind::OptimisticMwu => Algorithm::OptimisticMwu,
            BaselineKind::MirrorProx => Algorithm::MirrorProx,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    /// `Auto` means `sqrt(2R / T) / B` for MWU (`R` the divergence range of
    /// the start point) and `1/(2L)` for the other two.
    pub eta: EtaChoice,
    pub outer_iterations: usize,
    pub initial_point: Option<JointPoint>,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, outer_iterations: usize) -> Self {
        Self { kind, eta: EtaChoice::Auto, outer_iterations, initial_point: None }
    }

    pub fn with_eta(mut self, eta: EtaChoice) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_initial_point(mut self, z0: JointPoint) -> Self {
        self.initial_point = Some(z0);
        self
    }

    /// `(requested, effective)`; mirror prox is clamped to `1/(2L)`.
    pub fn resolve_eta(&self, setup: &ProximalSetup, spec: &GameSpec, z0: &JointPoint) -> Result<(f64, f64)> {
        let cap = 1.0 / (2.0 * spec.lipschitz());
        let requested = match self.eta {
            EtaChoice::Fixed(eta) => {
                if !(eta.is_finite() && eta > 0.0) {
                    return Err(CpmError::config(format!("step size must be positive, got {eta}")));
                }
                eta
            }
            EtaChoice::Auto => match self.kind {
                BaselineKind::Mwu => {
                    let range =
                        (0..setup.num_blocks()).map(|i| setup.divergence_range(i, z0.block(i))).fold(0.0, f64::max);
                    let horizon = self.outer_iterations.max(1) as f64;
                    let b = spec.gradient_bound();
                    if b > 0.0 && range > 0.0 {
                        math::sqrt(2.0 * range / horizon) / b
                    } else {
                        cap
                    }
                }
                BaselineKind::OptimisticMwu | BaselineKind::MirrorProx => cap,
            },
        };
        let effective = if self.kind == BaselineKind::MirrorProx { requested.min(cap) } else { requested };
        Ok((requested, effective))
    }
}

fn start(setup: &ProximalSetup, spec: &GameSpec, config: &BaselineConfig) -> Result<(RunTrace, JointPoint)> {
    if setup.dims() != spec.dims() {
        return Err(CpmError::shape(format!(
            "setup has dimensions {:?} but the game has {:?}",
            setup.dims(),
            spec.dims()
        )));
    }
    let z0 = match &config.initial_point {
        Some(z) => {
            z.check_dims(&setup.dims(), "initial point")?;
            if !setup.contains(z, 1e-9) {
                return Err(CpmError::config("initial point is not feasible"));
            }
            z.clone()
        }
        None => setup.center_point(),
    };
    let (requested, eta) = config.resolve_eta(setup, spec, &z0)?;
    let trace = RunTrace::new(config.kind.algorithm(), setup.domains().to_vec(), requested, eta, z0.clone());
    Ok((trace, z0))
}

fn record(t: usize, w: JointPoint, z: JointPoint, f_at_w: &BlockVec, prox_evaluations: usize) -> OuterIterate {
    OuterIterate {
        t,
        w,
        z,
        gradients: f_at_w.scaled(-1.0),
        inner_iterations: 0,
        prox_evaluations,
        residual: 0.0,
        residual_is_bound: false,
        residual_history: alloc::vec::Vec::new(),
        eps: 0.0,
    }
}

fn wrap(t: usize) -> impl Fn(CpmError) -> CpmError {
    move |e| CpmError::AtIteration { outer: t, source: alloc::boxed::Box::new(e) }
}

/// Online mirror descent with linearized utilities: play `z^{t-1}`, observe
/// its gradient, step. On simplices with entropy this is MWU.
pub fn run_mwu(setup: &ProximalSetup, spec: &GameSpec, config: &BaselineConfig) -> Result<RunTrace> {
    let (mut trace, mut z) = start(setup, spec, config)?;
    let eta = trace.eta;
    for t in 1..=config.outer_iterations {
        let f = spec.operator(&z).map_err(wrap(t))?;
        let next = setup.prox(&z, &f, eta).map_err(wrap(t))?;
        trace.push(record(t, z, next.clone(), &f, 1));
        z = next;
    }
    Ok(trace)
}

/// Optimistic OMD: play `prox(z^{t-1}, eta m^t)` with the prediction `m^t`
/// the previous step's operator value (zero at `t = 1`), then update the
/// secondary sequence with the observed value.
pub fn run_optimistic_mwu(setup: &ProximalSetup, spec: &GameSpec, config: &BaselineConfig) -> Result<RunTrace> {
    let (mut trace, mut z) = start(setup, spec, config)?;
    let eta = trace.eta;
    let mut prediction = BlockVec::zeros(&setup.dims());
    for t in 1..=config.outer_iterations {
        let w = setup.prox(&z, &prediction, eta).map_err(wrap(t))?;
        let f = spec.operator(&w).map_err(wrap(t))?;
        let next = setup.prox(&z, &f, eta).map_err(wrap(t))?;
        trace.push(record(t, w, next.clone(), &f, 2));
        prediction = f;
        z = next;
    }
    Ok(trace)
}

/// Mirror prox: an extrapolation step with `F(z^{t-1})` and a correction
/// with `F` at the extrapolated point. Regret is attributed to the
/// extrapolated points.
pub fn run_mirror_prox(setup: &ProximalSetup, spec: &GameSpec, config: &BaselineConfig) -> Result<RunTrace> {
    let (mut trace, mut z) = start(setup, spec, config)?;
    let eta = trace.eta;
    for t in 1..=config.outer_iterations {
        let f_z = spec.operator(&z).map_err(wrap(t))?;
        let w = setup.prox(&z, &f_z, eta).map_err(wrap(t))?;
        let f_w = spec.operator(&w).map_err(wrap(t))?;
        let next = setup.prox(&z, &f_w, eta).map_err(wrap(t))?;
        trace.push(record(t, w, next.clone(), &f_w, 2));
        z = next;
    }
    Ok(trace)
}

pub fn run_baseline(setup: &ProximalSetup, spec: &GameSpec, config: &BaselineConfig) -> Result<RunTrace> {
    match config.kind {
        BaselineKind::Mwu => run_mwu(setup, spec, config),
        BaselineKind::OptimisticMwu => run_optimistic_mwu(setup, spec, config),
        BaselineKind::MirrorProx => run_mirror_prox(setup, spec, config),
    }
}
