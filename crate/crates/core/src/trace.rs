//! Per-iteration records shared by the prox-method solvers and the baselines.

use alloc::vec::Vec;

use crate::game::Domain;
use crate::point::{BlockVec, JointPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Cpm,
    CpmDecentralized,
    Cmwu,
    Mwu,
    OptimisticMwu,
    MirrorProx,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Cpm => "cpm",
            Algorithm::CpmDecentralized => "cpm-decentralized",
            Algorithm::Cmwu => "cmwu",
            Algorithm::Mwu => "mwu",
            Algorithm::OptimisticMwu => "omwu",
            Algorithm::MirrorProx => "mirror-prox",
        }
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterIterate {
    /// 1-based outer index.
    pub t: usize,
    /// Regret-bearing iterate (the approximate fixed point for the prox
    /// method, the played strategy for baselines).
    pub w: JointPoint,
    /// Prox-anchored iterate, the centre of the next step.
    pub z: JointPoint,
    /// `grad_{x_i} u_i(w)` for every player.
    pub gradients: BlockVec,
    /// Applications of `w -> prox(z_prev, eta F(w))` in this outer step,
    /// including the one that produced `z`. Zero for baselines.
    pub inner_iterations: usize,
    pub prox_evaluations: usize,
    /// `||w - prox(z_prev, eta F(w))||`, or an upper bound on it when
    /// `residual_is_bound` is set.
    pub residual: f64,
    pub residual_is_bound: bool,
    /// Residuals measured by the inner loop, in order. The last entry is
    /// `residual` in residual-check mode.
    pub residual_history: Vec<f64>,
    pub eps: f64,
}

/// Trajectory of a solver run plus cumulative sums that make regret queries
/// O(d) at any horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub domains: Vec<Domain>,
    pub eta_requested: f64,
    pub eta: f64,
    pub initial_point: JointPoint,
    iterates: Vec<OuterIterate>,
    // entry t-1 holds sums over s <= t
    cumulative_gradients: Vec<BlockVec>,
    cumulative_values: Vec<Vec<f64>>,
}

impl RunTrace {
    pub fn new(
        algorithm: Algorithm,
        domains: Vec<Domain>,
        eta_requested: f64,
        eta: f64,
        initial_point: JointPoint,
    ) -> Self {
        Self {
            algorithm,
            domains,
            eta_requested,
            eta,
            initial_point,
            iterates: Vec::new(),
            cumulative_gradients: Vec::new(),
            cumulative_values: Vec::new(),
        }
    }

    pub fn eta_clamped(&self) -> bool {
        self.eta != self.eta_requested
    }

    pub fn push(&mut self, iterate: OuterIterate) {
        let values: Vec<f64> = (0..iterate.w.num_blocks())
            .map(|i| crate::point::dot(iterate.gradients.block(i), iterate.w.block(i)))
            .collect();
        let (grads, vals) = match (self.cumulative_gradients.last(), self.cumulative_values.last()) {
            (Some(g), Some(v)) => (
                BlockVec::new(
                    g.blocks()
                        .iter()
                        .zip(iterate.gradients.blocks())
                        .map(|(acc, new)| acc.iter().zip(new).map(|(a, b)| a + b).collect())
                        .collect(),
                ),
                v.iter().zip(&values).map(|(a, b)| a + b).collect(),
            ),
            _ => (iterate.gradients.clone(), values),
        };
        self.cumulative_gradients.push(grads);
        self.cumulative_values.push(vals);
        self.iterates.push(iterate);
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn num_players(&self) -> usize {
        self.domains.len()
    }

    pub fn iterates(&self) -> &[OuterIterate] {
        &self.iterates
    }

    pub fn iterate(&self, t: usize) -> &OuterIterate {
        &self.iterates[t - 1]
    }

    /// `sum_{s <= t} grad_{x_i} u_i(w^s)`.
    pub fn cumulative_gradient(&self, t: usize, player: usize) -> &[f64] {
        self.cumulative_gradients[t - 1].block(player)
    }

    /// `sum_{s <= t} <grad_{x_i} u_i(w^s), w_i^s>`.
    pub fn cumulative_value(&self, t: usize, player: usize) -> f64 {
        self.cumulative_values[t - 1][player]
    }

    pub fn total_inner_iterations(&self) -> usize {
        self.iterates.iter().map(|it| it.inner_iterations).sum()
    }

    pub fn total_prox_evaluations(&self) -> usize {
        self.iterates.iter().map(|it| it.prox_evaluations).sum()
    }

    pub fn eps_sum(&self, horizon: usize) -> f64 {
        self.iterates[..horizon].iter().map(|it| it.eps).sum()
    }

    pub fn last_z(&self) -> &JointPoint {
        self.iterates.last().map_or(&self.initial_point, |it| &it.z)
    }

    /// Anchor of outer step `t`: `z^{t-1}`.
    pub fn anchor(&self, t: usize) -> &JointPoint {
        if t <= 1 {
            &self.initial_point
        } else {
            &self.iterates[t - 2].z
        }
    }
}
