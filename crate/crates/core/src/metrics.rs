//! Regret, coarse-correlated-equilibrium gap and zero-sum duality gap.
//!
//! Regret of player `i` up to `T` is
//! `max_{x in X_i} sum_{t <= T} <grad_{x_i} u_i(w^t), x - w_i^t>`, read off
//! the cumulative sums stored in the trace. By multilinearity, for
//! normal-form games the CCE gap of the average product distribution
//! `(1/T) sum_t w_1^t x ... x w_n^t` is `max_i Reg_i^T / T`, so the mixture
//! itself is never built.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CpmError, Result};
use crate::game::{Domain, NormalFormGame};
use crate::point::JointPoint;
use crate::proximal::ProximalSetup;
pub use crate::trace::RunTrace;

fn check_horizon(trace: &RunTrace, horizon: usize) -> Result<()> {
    if horizon > trace.len() {
        return Err(CpmError::input(format!("horizon {horizon} exceeds trace length {}", trace.len())));
    }
    Ok(())
}

fn check_player(trace: &RunTrace, player: usize) -> Result<()> {
    if player >= trace.num_players() {
        return Err(CpmError::input(format!("player {player} out of range for {} players", trace.num_players())));
    }
    Ok(())
}

/// Regret of `player` over the first `horizon` regret-bearing iterates.
pub fn regret(trace: &RunTrace, player: usize, horizon: usize) -> Result<f64> {
    check_horizon(trace, horizon)?;
    check_player(trace, player)?;
    if horizon == 0 {
        return Ok(0.0);
    }
    let domain = &trace.domains[player];
    Ok(domain.support(trace.cumulative_gradient(horizon, player)) - trace.cumulative_value(horizon, player))
}

/// Same quantity as [`regret`], summed from the per-step gradients instead of
/// the stored cumulative sums.
pub fn regret_from_steps(trace: &RunTrace, player: usize, horizon: usize) -> Result<f64> {
    check_horizon(trace, horizon)?;
    check_player(trace, player)?;
    let domain = &trace.domains[player];
    let mut sum = vec![0.0; domain.dim()];
    let mut value = 0.0;
    for it in &trace.iterates()[..horizon] {
        let g = it.gradients.block(player);
        for (s, v) in sum.iter_mut().zip(g) {
            *s += v;
        }
        value += crate::point::dot(g, it.w.block(player));
    }
    if horizon == 0 {
        return Ok(0.0);
    }
    Ok(domain.support(&sum) - value)
}

pub fn regrets(trace: &RunTrace, horizon: usize) -> Result<Vec<f64>> {
    (0..trace.num_players()).map(|i| regret(trace, i, horizon)).collect()
}

pub fn max_regret(trace: &RunTrace, horizon: usize) -> Result<f64> {
    Ok(regrets(trace, horizon)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn check_game(trace: &RunTrace, game: &NormalFormGame) -> Result<()> {
    let matches = trace.domains.len() == game.num_players()
        && trace.domains.iter().zip(game.action_counts()).all(|(d, &k)| *d == Domain::Simplex { dim: k });
    if !matches {
        return Err(CpmError::Unsupported("trace does not live on the simplices of this normal-form game".into()));
    }
    Ok(())
}

/// Per-player deviation incentives `Reg_i^T / T` of the average product
/// distribution of play.
pub fn cce_gaps(trace: &RunTrace, game: &NormalFormGame, horizon: usize) -> Result<Vec<f64>> {
    check_game(trace, game)?;
    if horizon == 0 {
        return Err(CpmError::input("CCE gap needs a horizon of at least 1"));
    }
    Ok(regrets(trace, horizon)?.into_iter().map(|r| r / horizon as f64).collect())
}

/// Largest deviation incentive of any player against the average product
/// distribution of the first `horizon` regret-bearing iterates.
pub fn cce_gap(trace: &RunTrace, game: &NormalFormGame, horizon: usize) -> Result<f64> {
    Ok(cce_gaps(trace, game, horizon)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Average of the first `horizon` regret-bearing iterates.
pub fn average_strategy(trace: &RunTrace, horizon: usize) -> Result<JointPoint> {
    check_horizon(trace, horizon)?;
    if horizon == 0 {
        return Err(CpmError::input("average needs a horizon of at least 1"));
    }
    let scale = 1.0 / horizon as f64;
    let mut avg = JointPoint::zeros(&trace.iterate(1).w.dims());
    for it in &trace.iterates()[..horizon] {
        for i in 0..avg.num_blocks() {
            for (a, v) in avg.block_mut(i).iter_mut().zip(it.w.block(i)) {
                *a += v;
            }
        }
    }
    Ok(avg.scaled(scale))
}

/// Two-player zero-sum duality gap of the averaged strategies:
/// `max_x u_1(x, avg_2) - min_y u_1(avg_1, y)`.
pub fn duality_gap(trace: &RunTrace, game: &NormalFormGame, horizon: usize) -> Result<f64> {
    check_game(trace, game)?;
    let scale = game.utility_bound().max(1.0);
    if !game.is_zero_sum(1e-12 * scale) {
        return Err(CpmError::Unsupported("duality gap is only defined for two-player zero-sum games".into()));
    }
    let avg = average_strategy(trace, horizon)?;
    let best_row = game.gradient(0, &avg)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    // u_1(avg_1, e_b) = -grad u_2(avg)[b]
    let best_col = game.gradient(1, &avg)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(best_row + best_col)
}

/// Constant-regret guarantee of the prox method for `player`:
/// `(1/eta) max_x D_i(x || z_i^0) + B sum_t eps^t`.
pub fn cpm_regret_bound(
    setup: &ProximalSetup,
    initial_point: &JointPoint,
    player: usize,
    eta: f64,
    gradient_bound: f64,
    eps_sum: f64,
) -> f64 {
    setup.divergence_range(player, initial_point.block(player)) / eta + gradient_bound * eps_sum
}

/// Bound on the prox-method CCE gap at horizon `T`:
/// `max_i [(1/eta) max_x D_i(x || z_i^0) + B sum_{t<=T} eps^t] / T`.
pub fn cpm_cce_bound(
    setup: &ProximalSetup,
    initial_point: &JointPoint,
    eta: f64,
    gradient_bound: f64,
    eps_sum: f64,
    horizon: usize,
) -> f64 {
    (0..setup.num_blocks())
        .map(|i| cpm_regret_bound(setup, initial_point, i, eta, gradient_bound, eps_sum))
        .fold(0.0, f64::max)
        / horizon.max(1) as f64
}
