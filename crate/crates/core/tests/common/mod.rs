// Independent reference computations. Nothing here calls the crate's own
// gradient, prox or metric code paths.
#![allow(dead_code)]

use cpm_core::linalg::DenseMatrix;
use cpm_core::{JointPoint, NormalFormGame};

/// Every joint action profile of the game, in row-major order.
pub fn profiles(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &k in counts {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

fn profile_prob(z: &JointPoint, actions: &[usize]) -> f64 {
    actions.iter().enumerate().map(|(j, &a)| z.block(j)[a]).product()
}

/// Expected utility by summing over every joint action.
pub fn brute_utility(game: &NormalFormGame, player: usize, z: &JointPoint) -> f64 {
    profiles(game.action_counts()).iter().map(|a| profile_prob(z, a) * game.payoff(player, a)).sum()
}

/// Central finite differences of the utility in player `i`'s block,
/// evaluated off the simplex (the utility is a polynomial).
pub fn finite_difference_gradient(game: &NormalFormGame, player: usize, z: &JointPoint, h: f64) -> Vec<f64> {
    (0..z.block(player).len())
        .map(|a| {
            let mut plus = z.clone();
            plus.block_mut(player)[a] += h;
            let mut minus = z.clone();
            minus.block_mut(player)[a] -= h;
            (brute_utility(game, player, &plus) - brute_utility(game, player, &minus)) / (2.0 * h)
        })
        .collect()
}

/// CCE gap of the uniform mixture over `ws` of the product distributions,
/// computed by materializing the mixture and checking every pure deviation.
pub fn brute_cce_gap(game: &NormalFormGame, ws: &[JointPoint]) -> f64 {
    let counts = game.action_counts();
    let all = profiles(counts);
    let mu: Vec<f64> =
        all.iter().map(|a| ws.iter().map(|w| profile_prob(w, a)).sum::<f64>() / ws.len() as f64).collect();
    let mut gap = f64::NEG_INFINITY;
    for i in 0..counts.len() {
        let on_path: f64 = all.iter().zip(&mu).map(|(a, m)| m * game.payoff(i, a)).sum();
        for dev in 0..counts[i] {
            let deviated: f64 = all
                .iter()
                .zip(&mu)
                .map(|(a, m)| {
                    let mut b = a.clone();
                    b[i] = dev;
                    m * game.payoff(i, &b)
                })
                .sum();
            gap = gap.max(deviated - on_path);
        }
    }
    gap
}

/// Value and row/column equilibrium strategies of the 2x2 zero-sum game
/// `[[a, b], [c, d]]` (row player maximizes).
pub fn nash_2x2(a: f64, b: f64, c: f64, d: f64) -> (f64, [f64; 2], [f64; 2]) {
    // pure saddle points first
    let m = [[a, b], [c, d]];
    for r in 0..2 {
        for col in 0..2 {
            let v = m[r][col];
            let row_min = v <= m[r][1 - col];
            let col_max = v >= m[1 - r][col];
            if row_min && col_max {
                let mut x = [0.0; 2];
                let mut y = [0.0; 2];
                x[r] = 1.0;
                y[col] = 1.0;
                return (v, x, y);
            }
        }
    }
    let den = a + d - b - c;
    let p = (d - c) / den;
    let q = (d - b) / den;
    ((a * d - b * c) / den, [p, 1.0 - p], [q, 1.0 - q])
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Minimizes `<eg, x> + KL(x || center)` over the simplex by projected
/// gradient descent with step `0.1 / (1 + ||eg||_inf)`.
pub fn generic_entropy_prox(center: &[f64], eg: &[f64], iterations: usize) -> Vec<f64> {
    let step = 0.1 / (1.0 + eg.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut x = center.to_vec();
    for _ in 0..iterations {
        let grad: Vec<f64> =
            x.iter().zip(center).zip(eg).map(|((xi, ci), gi)| gi + (xi.max(1e-300) / ci).ln()).collect();
        let moved: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - step * gi).collect();
        x = project_simplex(&moved);
    }
    x
}

/// Largest singular value by power iteration on `A^T A`.
pub fn power_spectral_norm(m: &DenseMatrix, iterations: usize) -> f64 {
    let mut v: Vec<f64> = (0..m.cols()).map(|k| 1.0 + 0.1 * k as f64).collect();
    let mut sigma = 0.0;
    for _ in 0..iterations {
        let av = m.mul_vec(&v);
        let atav = m.transpose().mul_vec(&av);
        let norm = atav.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = atav.iter().map(|x| x / norm).collect();
        sigma = m.mul_vec(&v).iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    sigma
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
