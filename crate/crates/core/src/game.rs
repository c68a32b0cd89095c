//! Games: normal-form payoff tensors, generic convex games behind an oracle,
//! and the joint operator `F(z) = (-grad_1 u_1(z), ..., -grad_n u_n(z))`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CpmError, Result};
use crate::linalg::DenseMatrix;
use crate::math;
use crate::point::{BlockVec, JointPoint};

/// Lipschitz constants below this are reported as this floor so that step
/// sizes `1 / (2L)` stay finite.
pub const LIPSCHITZ_FLOOR: f64 = 1e-9;

/// Feasible set of one player.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Probability simplex of dimension `dim`.
    Simplex { dim: usize },
    /// Euclidean ball of `radius` centred at the origin.
    Ball { dim: usize, radius: f64 },
    /// Axis-aligned box `lower <= x <= upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Simplex { dim } | Domain::Ball { dim, .. } => *dim,
            Domain::Box { lower, .. } => lower.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Simplex { dim } if *dim == 0 => Err(CpmError::domain("simplex must have at least one action")),
            Domain::Ball { radius, .. } if !(radius.is_finite() && *radius > 0.0) => {
                Err(CpmError::domain(format!("ball radius must be positive, got {radius}")))
            }
            Domain::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(CpmError::domain("box bounds have different lengths"));
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u)) {
                    return Err(CpmError::domain("box needs finite bounds with lower <= upper"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Uniform strategy for simplices, the centre otherwise.
    pub fn center(&self) -> Vec<f64> {
        match self {
            Domain::Simplex { dim } => vec![1.0 / *dim as f64; *dim],
            Domain::Ball { dim, .. } => vec![0.0; *dim],
            Domain::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Domain::Simplex { .. } => x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol,
            Domain::Ball { radius, .. } => math::sqrt(x.iter().map(|v| v * v).sum()) <= radius + tol,
            Domain::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol)
            }
        }
    }

    /// Support function `max_{x in X} <g, x>`.
    pub fn support(&self, g: &[f64]) -> f64 {
        match self {
            Domain::Simplex { .. } => g.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Domain::Ball { radius, .. } => radius * math::sqrt(g.iter().map(|v| v * v).sum()),
            Domain::Box { lower, upper } => {
                g.iter().zip(lower.iter().zip(upper)).map(|(&gi, (&l, &u))| (gi * l).max(gi * u)).sum()
            }
        }
    }

    /// A maximizer of `<g, x>` over the domain.
    pub fn best_response(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Domain::Simplex { dim } => {
                let mut best = 0;
                for (a, &v) in g.iter().enumerate() {
                    if v > g[best] {
                        best = a;
                    }
                }
                let mut x = vec![0.0; *dim];
                x[best] = 1.0;
                x
            }
            Domain::Ball { dim, radius } => {
                let norm = math::sqrt(g.iter().map(|v| v * v).sum());
                if norm == 0.0 {
                    vec![0.0; *dim]
                } else {
                    g.iter().map(|v| v * radius / norm).collect()
                }
            }
            Domain::Box { lower, upper } => {
                g.iter().zip(lower.iter().zip(upper)).map(|(&gi, (&l, &u))| if gi >= 0.0 { u } else { l }).collect()
            }
        }
    }
}

/// Gradient and utility oracle of a convex game.
///
/// `gradient(i, z)` must return `grad_{x_i} u_i(z)`, the gradient of player
/// `i`'s utility with respect to its own strategy.
pub trait GameOracle: fmt::Debug + Send + Sync {
    fn dims(&self) -> &[usize];

    fn utility(&self, player: usize, z: &JointPoint) -> Result<f64>;

    fn gradient(&self, player: usize, z: &JointPoint) -> Result<Vec<f64>>;
}

/// A convex game together with the constants the solver needs: a Lipschitz
/// constant `L` of `F` and a bound `B` on `||F(z)||_*`, both in the norm pair
/// of the proximal setup that will be used with it.
#[derive(Debug, Clone)]
pub struct GameSpec {
    domains: Vec<Domain>,
    oracle: Arc<dyn GameOracle>,
    lipschitz: f64,
    gradient_bound: f64,
}

impl GameSpec {
    pub fn new(domains: Vec<Domain>, oracle: Arc<dyn GameOracle>, lipschitz: f64, gradient_bound: f64) -> Result<Self> {
        if domains.is_empty() {
            return Err(CpmError::InvalidGame("a game needs at least one player".into()));
        }
        for d in &domains {
            d.validate()?;
        }
        let dims: Vec<usize> = domains.iter().map(Domain::dim).collect();
        if dims != oracle.dims() {
            return Err(CpmError::shape(format!(
                "domains have dimensions {:?} but the oracle expects {:?}",
                dims,
                oracle.dims()
            )));
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(CpmError::InvalidGame(format!("Lipschitz constant must be positive, got {lipschitz}")));
        }
        if !(gradient_bound.is_finite() && gradient_bound >= 0.0) {
            return Err(CpmError::InvalidGame(format!("gradient bound must be nonnegative, got {gradient_bound}")));
        }
        Ok(Self { domains, oracle, lipschitz, gradient_bound })
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn dims(&self) -> Vec<usize> {
        self.domains.iter().map(Domain::dim).collect()
    }

    pub fn num_players(&self) -> usize {
        self.domains.len()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn gradient_bound(&self) -> f64 {
        self.gradient_bound
    }

    pub fn oracle(&self) -> &Arc<dyn GameOracle> {
        &self.oracle
    }

    /// Centre of every domain; uniform strategies for simplices.
    pub fn center_point(&self) -> JointPoint {
        JointPoint::new(self.domains.iter().map(Domain::center).collect())
    }

    pub fn gradient(&self, player: usize, z: &JointPoint) -> Result<Vec<f64>> {
        z.check_dims(&self.dims(), "joint point")?;
        let g = self.oracle.gradient(player, z)?;
        if g.len() != self.domains[player].dim() {
            return Err(CpmError::shape(format!(
                "oracle returned gradient of length {} for player {player}, expected {}",
                g.len(),
                self.domains[player].dim()
            )));
        }
        Ok(g)
    }

    pub fn utility(&self, player: usize, z: &JointPoint) -> Result<f64> {
        z.check_dims(&self.dims(), "joint point")?;
        self.oracle.utility(player, z)
    }

    /// The game operator: block `i` is `-grad_{x_i} u_i(z)`.
    pub fn operator(&self, z: &JointPoint) -> Result<BlockVec> {
        let blocks = (0..self.num_players())
            .map(|i| self.gradient(i, z).map(|g| g.into_iter().map(|v| -v).collect::<Vec<f64>>()))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockVec::new(blocks))
    }
}

/// A finite game in normal form with payoff tensors stored flat, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    action_counts: Vec<usize>,
    strides: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
    utility_bound: f64,
}

impl NormalFormGame {
    /// Validates shapes and that every payoff lies in `[-V, V]`.
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<Vec<f64>>, utility_bound: f64) -> Result<Self> {
        let n = action_counts.len();
        if n == 0 {
            return Err(CpmError::InvalidGame("a game needs at least one player".into()));
        }
        if action_counts.contains(&0) {
            return Err(CpmError::InvalidGame("every player needs at least one action".into()));
        }
        if !(utility_bound.is_finite() && utility_bound >= 0.0) {
            return Err(CpmError::InvalidGame(format!(
                "utility bound must be finite and nonnegative, got {utility_bound}"
            )));
        }
        if payoffs.len() != n {
            return Err(CpmError::shape(format!("{} payoff tensors for {} players", payoffs.len(), n)));
        }
        let size: usize = action_counts.iter().product();
        for (i, tensor) in payoffs.iter().enumerate() {
            if tensor.len() != size {
                return Err(CpmError::shape(format!(
                    "payoff tensor of player {} has {} entries, expected {}",
                    i + 1,
                    tensor.len(),
                    size
                )));
            }
            if let Some(bad) = tensor.iter().find(|e| !e.is_finite() || e.abs() > utility_bound) {
                return Err(CpmError::InvalidGame(format!(
                    "payoff {bad} of player {} violates the utility bound {utility_bound}",
                    i + 1
                )));
            }
        }
        let mut strides = vec![1; n];
        for j in (0..n.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * action_counts[j + 1];
        }
        Ok(Self { action_counts, strides, payoffs, utility_bound })
    }

    /// Two-player game from row-major payoff matrices.
    pub fn bimatrix(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>, utility_bound: f64) -> Result<Self> {
        Self::new(vec![rows, cols], vec![a, b], utility_bound)
    }

    /// Two-player zero-sum game where the row player receives `a`.
    pub fn zero_sum(rows: usize, cols: usize, a: Vec<f64>) -> Result<Self> {
        let v = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let b = a.iter().map(|x| -x).collect();
        Self::bimatrix(rows, cols, a, b, v)
    }

    /// Matching pennies: the row player wins 1 on a match, loses 1 otherwise.
    pub fn matching_pennies() -> Self {
        Self::zero_sum(2, 2, vec![1.0, -1.0, -1.0, 1.0]).expect("valid game")
    }

    /// Game whose payoffs are all zero (so `F` vanishes identically).
    pub fn null_game(action_counts: Vec<usize>, utility_bound: f64) -> Result<Self> {
        let size: usize = action_counts.iter().product();
        let n = action_counts.len();
        Self::new(action_counts, vec![vec![0.0; size]; n], utility_bound)
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn utility_bound(&self) -> f64 {
        self.utility_bound
    }

    pub fn payoffs(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn num_profiles(&self) -> usize {
        self.action_counts.iter().product()
    }

    /// Flat index of a pure action profile.
    pub fn flat_index(&self, actions: &[usize]) -> usize {
        actions.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn payoff(&self, player: usize, actions: &[usize]) -> f64 {
        self.payoffs[player][self.flat_index(actions)]
    }

    pub fn is_zero_sum(&self, tol: f64) -> bool {
        self.num_players() == 2 && self.payoffs[0].iter().zip(&self.payoffs[1]).all(|(a, b)| (a + b).abs() <= tol)
    }

    fn check_point(&self, player: usize, z: &JointPoint) -> Result<()> {
        if player >= self.num_players() {
            return Err(CpmError::shape(format!(
                "player index {player} out of range for a {}-player game",
                self.num_players()
            )));
        }
        z.check_dims(&self.action_counts, "strategy profile")
    }

    /// Expected utility of `player` under the product distribution `z`.
    pub fn utility(&self, player: usize, z: &JointPoint) -> Result<f64> {
        self.check_point(player, z)?;
        let tensor = &self.payoffs[player];
        let mut total = 0.0;
        self.for_each_profile(None, z, |k, weight| total += weight * tensor[k]);
        Ok(total)
    }

    /// `grad_{x_i} u_i(z)`: entry `a` is the expected utility of action `a`
    /// against the opponents' mixed strategies.
    pub fn gradient(&self, player: usize, z: &JointPoint) -> Result<Vec<f64>> {
        self.check_point(player, z)?;
        let tensor = &self.payoffs[player];
        let stride = self.strides[player];
        let d = self.action_counts[player];
        let mut grad = vec![0.0; d];
        self.for_each_profile(Some(player), z, |k, weight| {
            grad[(k / stride) % d] += weight * tensor[k];
        });
        Ok(grad)
    }

    /// Visits every pure profile with its probability under `z`, leaving out
    /// the factor of `skip` when given.
    fn for_each_profile(&self, skip: Option<usize>, z: &JointPoint, mut f: impl FnMut(usize, f64)) {
        let n = self.num_players();
        let mut actions = vec![0usize; n];
        // prefix[j] = product of the factors of players 0..j
        let mut prefix = vec![1.0; n + 1];
        let factor = |j: usize, a: usize| if Some(j) == skip { 1.0 } else { z.block(j)[a] };
        for j in 0..n {
            prefix[j + 1] = prefix[j] * factor(j, 0);
        }
        let size = self.num_profiles();
        for k in 0..size {
            f(k, prefix[n]);
            // odometer increment, last player fastest
            let mut j = n;
            while j > 0 {
                j -= 1;
                actions[j] += 1;
                if actions[j] < self.action_counts[j] {
                    break;
                }
                actions[j] = 0;
            }
            for m in j..n {
                prefix[m + 1] = prefix[m] * factor(m, actions[m]);
            }
        }
    }

    /// Uniformly random payoffs in `[-V, V]`, deterministic in `seed`.
    pub fn random(action_counts: Vec<usize>, utility_bound: f64, seed: u64) -> Result<Self> {
        if !(utility_bound.is_finite() && utility_bound > 0.0) {
            return Err(CpmError::InvalidGame("random games need V > 0".into()));
        }
        if action_counts.is_empty() || action_counts.contains(&0) {
            return Err(CpmError::InvalidGame("random games need at least one player and one action each".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size: usize = action_counts.iter().product();
        let payoffs = (0..action_counts.len())
            .map(|_| (0..size).map(|_| rng.gen_range(-utility_bound..=utility_bound)).collect())
            .collect();
        Self::new(action_counts, payoffs, utility_bound)
    }

    /// Random two-player zero-sum game with entries in `[-V, V]`.
    pub fn random_zero_sum(rows: usize, cols: usize, utility_bound: f64, seed: u64) -> Result<Self> {
        let g = Self::random(vec![rows, cols], utility_bound, seed)?;
        let a = g.payoffs[0].clone();
        let b = a.iter().map(|x| -x).collect();
        Self::bimatrix(rows, cols, a, b, utility_bound)
    }

    /// Uniform strategy for every player.
    pub fn uniform_profile(&self) -> JointPoint {
        JointPoint::new(self.action_counts.iter().map(|&d| vec![1.0 / d as f64; d]).collect())
    }

    /// Pure profile as a joint point of indicator vectors.
    pub fn pure_profile(&self, actions: &[usize]) -> JointPoint {
        JointPoint::new(
            self.action_counts
                .iter()
                .zip(actions)
                .map(|(&d, &a)| {
                    let mut x = vec![0.0; d];
                    x[a] = 1.0;
                    x
                })
                .collect(),
        )
    }
}

/// Convenience free function mirroring [`NormalFormGame::random`].
pub fn random_game(action_counts: Vec<usize>, utility_bound: f64, seed: u64) -> Result<NormalFormGame> {
    NormalFormGame::random(action_counts, utility_bound, seed)
}

impl GameOracle for NormalFormGame {
    fn dims(&self) -> &[usize] {
        &self.action_counts
    }

    fn utility(&self, player: usize, z: &JointPoint) -> Result<f64> {
        NormalFormGame::utility(self, player, z)
    }

    fn gradient(&self, player: usize, z: &JointPoint) -> Result<Vec<f64>> {
        NormalFormGame::gradient(self, player, z)
    }
}

/// Normal-form game over simplices with `B = L = sqrt(n) V` in the
/// `(||.||_Delta, ||.||_{*Delta})` norm pair.
pub fn make_normal_form_spec(game: NormalFormGame) -> GameSpec {
    let n = game.num_players() as f64;
    let bound = math::sqrt(n) * game.utility_bound();
    let domains = game.action_counts().iter().map(|&dim| Domain::Simplex { dim }).collect();
    GameSpec::new(domains, Arc::new(game), bound.max(LIPSCHITZ_FLOOR), bound)
        .expect("a validated normal-form game always yields a valid game spec")
}

/// `A_{ij}`: how player `j`'s strategy enters player `i`'s utility.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub player: usize,
    pub opponent: usize,
    pub matrix: DenseMatrix,
}

/// Game with utilities `u_i(z) = sum_{j != i} z_i^T A_{ij} z_j` over
/// origin-centred Euclidean balls.
#[derive(Debug, Clone)]
pub struct BilinearBallGame {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    interactions: Vec<Interaction>,
}

impl BilinearBallGame {
    pub fn new(dims: Vec<usize>, interactions: Vec<Interaction>) -> Result<Self> {
        let n = dims.len();
        for it in &interactions {
            if it.player >= n || it.opponent >= n || it.player == it.opponent {
                return Err(CpmError::shape(format!(
                    "interaction ({}, {}) does not name two distinct players of {}",
                    it.player, it.opponent, n
                )));
            }
            if it.matrix.rows() != dims[it.player] || it.matrix.cols() != dims[it.opponent] {
                return Err(CpmError::shape(format!(
                    "interaction ({}, {}) is {}x{}, expected {}x{}",
                    it.player,
                    it.opponent,
                    it.matrix.rows(),
                    it.matrix.cols(),
                    dims[it.player],
                    dims[it.opponent]
                )));
            }
        }
        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        Ok(Self { dims, offsets, interactions })
    }

    /// The linear map `M` with `F(z) = -M z`, as a dense `d x d` matrix.
    pub fn stacked_operator(&self) -> DenseMatrix {
        let d: usize = self.dims.iter().sum();
        let mut m = DenseMatrix::zeros(d, d);
        for it in &self.interactions {
            let r0 = self.offsets[it.player];
            let c0 = self.offsets[it.opponent];
            for r in 0..it.matrix.rows() {
                for c in 0..it.matrix.cols() {
                    let cur = m.get(r0 + r, c0 + c);
                    m.set(r0 + r, c0 + c, cur + it.matrix.get(r, c));
                }
            }
        }
        m
    }
}

impl GameOracle for BilinearBallGame {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn utility(&self, player: usize, z: &JointPoint) -> Result<f64> {
        Ok(self
            .interactions
            .iter()
            .filter(|it| it.player == player)
            .map(|it| it.matrix.bilinear(z.block(player), z.block(it.opponent)))
            .sum())
    }

    fn gradient(&self, player: usize, z: &JointPoint) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.dims[player]];
        for it in self.interactions.iter().filter(|it| it.player == player) {
            for (acc, v) in g.iter_mut().zip(it.matrix.mul_vec(z.block(it.opponent))) {
                *acc += v;
            }
        }
        Ok(g)
    }
}

/// Bilinear game over balls with the Euclidean norm pair. `L` is the spectral
/// norm of the stacked interaction operator; since `F` is linear and every
/// ball is centred at the origin, `B = L * max_z ||z||_2`.
pub fn make_quadratic_ball_spec(dims: Vec<usize>, radii: Vec<f64>, interactions: Vec<Interaction>) -> Result<GameSpec> {
    if dims.len() != radii.len() {
        return Err(CpmError::shape(format!("{} dimensions but {} radii", dims.len(), radii.len())));
    }
    let game = BilinearBallGame::new(dims.clone(), interactions)?;
    let spectral = game.stacked_operator().spectral_norm();
    let radius = math::sqrt(radii.iter().map(|r| r * r).sum());
    let domains = dims.iter().zip(&radii).map(|(&dim, &radius)| Domain::Ball { dim, radius }).collect();
    GameSpec::new(domains, Arc::new(game), spectral.max(LIPSCHITZ_FLOOR), spectral * radius)
}
