//! End-of-run summary with the theoretical bounds next to the measured
//! values.

use cpm_core::game::make_normal_form_spec;
use cpm_core::{metrics, NormalFormGame, ProximalSetup, RunTrace};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::solvers::SolverKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    /// `prox-method`: `(1/eta) max D_i(. || z_i^0) + B sum_t eps^t`;
    /// `omd`: `(1/eta) max D_i(. || z_i^0) + eta T V^2 / 2`.
    pub kind: String,
    pub regret: Vec<f64>,
    pub cce_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub solver: String,
    pub actions: Vec<usize>,
    pub outer_iterations: usize,
    pub eta_requested: f64,
    pub eta: f64,
    pub eta_clamped: bool,
    pub lipschitz: f64,
    pub gradient_bound: f64,
    pub final_regrets: Vec<f64>,
    pub final_cce_gap: f64,
    pub total_inner_iterations: usize,
    pub total_prox_evaluations: usize,
    pub bounds: Option<Bounds>,
}

pub fn summarize(game: &NormalFormGame, solver: SolverKind, trace: &RunTrace) -> Result<RunSummary> {
    let spec = make_normal_form_spec(game.clone());
    let setup = ProximalSetup::for_spec(&spec)?;
    let t = trace.len();
    let z0 = &trace.initial_point;
    let range = |i: usize| setup.divergence_range(i, z0.block(i));
    let bounds = if solver.is_prox_method() {
        let eps_sum = trace.eps_sum(t);
        let b = spec.gradient_bound();
        Some(Bounds {
            kind: "prox-method".into(),
            regret: (0..game.num_players())
                .map(|i| metrics::cpm_regret_bound(&setup, z0, i, trace.eta, b, eps_sum))
                .collect(),
            cce_gap: metrics::cpm_cce_bound(&setup, z0, trace.eta, b, eps_sum, t),
        })
    } else if solver == SolverKind::Mwu {
        let v = game.utility_bound();
        let regret: Vec<f64> =
            (0..game.num_players()).map(|i| range(i) / trace.eta + trace.eta * t as f64 * v * v / 2.0).collect();
        let cce_gap = regret.iter().copied().fold(0.0, f64::max) / t.max(1) as f64;
        Some(Bounds { kind: "omd".into(), regret, cce_gap })
    } else {
        None
    };
    let (final_regrets, final_cce_gap) = if t == 0 {
        (vec![0.0; game.num_players()], 0.0)
    } else {
        (metrics::regrets(trace, t)?, metrics::cce_gap(trace, game, t)?)
    };
    Ok(RunSummary {
        solver: solver.name().into(),
        actions: game.action_counts().to_vec(),
        outer_iterations: t,
        eta_requested: trace.eta_requested,
        eta: trace.eta,
        eta_clamped: trace.eta_clamped(),
        lipschitz: spec.lipschitz(),
        gradient_bound: spec.gradient_bound(),
        final_regrets,
        final_cce_gap,
        total_inner_iterations: trace.total_inner_iterations(),
        total_prox_evaluations: trace.total_prox_evaluations(),
        bounds,
    })
}
