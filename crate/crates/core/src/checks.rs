//! Numeric certificates for the guarantees the solver relies on. Each check
//! returns a [`CheckReport`]; nothing here panics on a failed property.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::game::{Domain, GameSpec};
use crate::math;
use crate::metrics;
use crate::point::{BlockVec, JointPoint};
use crate::proximal::ProximalSetup;
use crate::sampling;
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Number of individual inequalities evaluated.
    pub evaluated: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen (negative means slack everywhere).
    pub worst_excess: f64,
    pub detail: String,
}

impl CheckReport {
    fn from_tally(name: &str, tally: Tally, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: tally.violations == 0,
            evaluated: tally.evaluated,
            violations: tally.violations,
            worst_excess: tally.worst,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Tally {
    evaluated: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self { evaluated: 0, violations: 0, worst: f64::NEG_INFINITY }
    }

    /// Records `lhs <= rhs + tol`.
    fn record(&mut self, lhs: f64, rhs: f64, tol: f64) {
        self.evaluated += 1;
        let excess = lhs - rhs;
        if !excess.is_finite() || excess > tol {
            self.violations += 1;
        }
        if excess > self.worst || excess.is_nan() {
            self.worst = excess;
        }
    }
}

/// Random prox instance: a centre (interior for entropy blocks), two
/// gradients and a step size.
fn random_prox_instance<R: Rng + ?Sized>(rng: &mut R, setup: &ProximalSetup) -> (JointPoint, BlockVec, BlockVec, f64) {
    let center = JointPoint::new(
        setup
            .domains()
            .iter()
            .map(|d| match d {
                Domain::Simplex { dim } => sampling::interior_simplex_point(rng, *dim, 1e-3),
                other => sampling::domain_point(rng, other),
            })
            .collect(),
    );
    let dims = setup.dims();
    let mut gradient =
        || BlockVec::new(dims.iter().map(|&d| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect());
    let g = gradient();
    let h = gradient();
    let eta = rng.gen_range(0.01..2.0);
    (center, g, h, eta)
}

/// `||prox_z(eta g) - prox_z(eta h)|| <= ||eta (g - h)||_*` on random samples.
pub fn prox_lipschitz<R: Rng + ?Sized>(
    setup: &ProximalSetup,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut tally = Tally::new();
    for _ in 0..samples {
        let (center, g, h, eta) = random_prox_instance(rng, setup);
        let p = setup.prox(&center, &g, eta)?;
        let q = setup.prox(&center, &h, eta)?;
        let lhs = setup.primal_norm(&p.sub(&q));
        let rhs = setup.dual_norm(&g.sub(&h).scaled(eta));
        tally.record(lhs, rhs, tol);
    }
    Ok(CheckReport::from_tally("prox 1-Lipschitz", tally, format!("{samples} random (centre, g, g', eta) tuples")))
}

/// `D(x || p) - D(x || z) + D(p || z) <= <eta g, x - p>` with
/// `p = prox_z(eta g)` and random feasible `x`.
pub fn three_point<R: Rng + ?Sized>(
    setup: &ProximalSetup,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut tally = Tally::new();
    for _ in 0..samples {
        let (center, g, _, eta) = random_prox_instance(rng, setup);
        let p = setup.prox(&center, &g, eta)?;
        let x = JointPoint::new(setup.domains().iter().map(|d| sampling::comparator(rng, d)).collect());
        let lhs = setup.divergence(&x, &p)? - setup.divergence(&x, &center)? + setup.divergence(&p, &center)?;
        let rhs = g.scaled(eta).dot(&x.sub(&p));
        tally.record(lhs, rhs, tol);
    }
    Ok(CheckReport::from_tally(
        "three-point inequality",
        tally,
        format!("{samples} random (centre, g, eta, comparator) tuples"),
    ))
}

/// `D_i(x || y) >= ||x - y||^2 / 2` in the block norm.
pub fn strong_convexity<R: Rng + ?Sized>(
    setup: &ProximalSetup,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut tally = Tally::new();
    for _ in 0..samples {
        for (i, d) in setup.domains().iter().enumerate() {
            let x = sampling::comparator(rng, d);
            let y = match d {
                Domain::Simplex { dim } => sampling::interior_simplex_point(rng, *dim, 1e-6),
                other => sampling::domain_point(rng, other),
            };
            let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let norm = setup.regularizers()[i].block_norm(&diff);
            let div = setup.block_divergence(i, &x, &y)?;
            tally.record(0.5 * norm * norm, div, tol);
        }
    }
    Ok(CheckReport::from_tally("regularizer 1-strong convexity", tally, format!("{samples} random pairs per block")))
}

/// Samples `||F(z)||_* <= B` and `||F(z) - F(z')||_* <= L ||z - z'||`.
pub fn operator_constants<R: Rng + ?Sized>(
    setup: &ProximalSetup,
    spec: &GameSpec,
    samples: usize,
    rng: &mut R,
) -> Result<(CheckReport, CheckReport)> {
    let mut bound = Tally::new();
    let mut lip = Tally::new();
    let b = spec.gradient_bound();
    let l = spec.lipschitz();
    let rel = 1e-12;
    for _ in 0..samples {
        let z = sampling::joint_point(rng, spec.domains());
        let y = sampling::joint_point(rng, spec.domains());
        let fz = spec.operator(&z)?;
        let fy = spec.operator(&y)?;
        bound.record(setup.dual_norm(&fz), b, rel * b.max(1.0));
        let dist = setup.primal_norm(&z.sub(&y));
        lip.record(setup.dual_norm(&fz.sub(&fy)), l * dist, rel * l.max(1.0));
    }
    Ok((
        CheckReport::from_tally("operator bound B", bound, format!("B = {b}, {samples} samples")),
        CheckReport::from_tally("operator Lipschitz L", lip, format!("L = {l}, {samples} pairs")),
    ))
}

/// Per-player inequality of every completed outer step:
/// `eta <grad u_i(w^t), x - w_i^t> <= -D_i(x||z_i^t) + D_i(x||z_i^{t-1})
///  - D_i(z_i^t||z_i^{t-1}) + eta B eps^t` for random comparators `x`.
pub fn per_iteration_inequality<R: Rng + ?Sized>(
    setup: &ProximalSetup,
    spec: &GameSpec,
    trace: &RunTrace,
    comparators: usize,
    tol: f64,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut tally = Tally::new();
    let eta = trace.eta;
    let b = spec.gradient_bound();
    for it in trace.iterates() {
        let anchor = trace.anchor(it.t);
        for (i, domain) in setup.domains().iter().enumerate() {
            let w_i = it.w.block(i);
            let z_i = it.z.block(i);
            let prev_i = anchor.block(i);
            let g = it.gradients.block(i);
            let step = setup.block_divergence(i, z_i, prev_i)?;
            for _ in 0..comparators {
                let x = sampling::comparator(rng, domain);
                let lhs = eta * x.iter().zip(w_i).zip(g).map(|((a, b), gi)| gi * (a - b)).sum::<f64>();
                let rhs = -setup.block_divergence(i, &x, z_i)? + setup.block_divergence(i, &x, prev_i)? - step
                    + eta * b * it.eps;
                tally.record(lhs, rhs, tol);
            }
        }
    }
    Ok(CheckReport::from_tally(
        "per-iteration regret inequality",
        tally,
        format!("{} outer steps, {comparators} comparators per player", trace.len()),
    ))
}

/// Consecutive inner residuals shrink by at least the factor `eta L < 1`.
/// Fails outright when `eta L >= 1`, since the map is then not certified to
/// contract.
pub fn contraction(trace: &RunTrace, lipschitz: f64, tol: f64) -> CheckReport {
    let modulus = trace.eta * lipschitz;
    let mut tally = Tally::new();
    let mut max_ratio = 0.0f64;
    for it in trace.iterates() {
        for pair in it.residual_history.windows(2) {
            tally.record(pair[1], modulus * pair[0], tol);
            if pair[0] > 1e-12 {
                max_ratio = max_ratio.max(pair[1] / pair[0]);
            }
        }
    }
    if modulus >= 1.0 {
        return CheckReport {
            passed: false,
            detail: format!("eta L = {modulus:.6} >= 1, the fixed-point map is not a contraction (max measured ratio {max_ratio:.4})"),
            ..CheckReport::from_tally("inner contraction", tally, String::new())
        };
    }
    CheckReport::from_tally(
        "inner contraction",
        tally,
        format!("modulus eta L = {modulus:.6}, max measured ratio {max_ratio:.6}"),
    )
}

/// Largest ratio `r_{k+1} / r_k` over inner residual pairs with
/// `r_k > floor`.
pub fn max_contraction_ratio(trace: &RunTrace, floor: f64) -> f64 {
    trace
        .iterates()
        .iter()
        .flat_map(|it| it.residual_history.windows(2))
        .filter(|p| p[0] > floor)
        .map(|p| p[1] / p[0])
        .fold(0.0, f64::max)
}

/// Inner iterations at step `t` are at most
/// `ceil(log2(diameter) + log2(1/eps^t) + 1)`.
pub fn inner_iteration_count(setup: &ProximalSetup, trace: &RunTrace) -> CheckReport {
    let diameter = setup.domain_diameter().max(f64::MIN_POSITIVE);
    let mut tally = Tally::new();
    for it in trace.iterates() {
        let cap = math::ceil(math::log2(diameter) + math::log2(1.0 / it.eps) + 1.0).max(1.0);
        tally.record(it.inner_iterations as f64, cap, 0.0);
    }
    CheckReport::from_tally(
        "inner iteration count",
        tally,
        format!("total inner iterations {}", trace.total_inner_iterations()),
    )
}

/// Measured regret never exceeds
/// `(1/eta) max_x D_i(x || z_i^0) + B sum_{t<=T} eps^t` at any horizon.
pub fn regret_bound(setup: &ProximalSetup, spec: &GameSpec, trace: &RunTrace, tol: f64) -> Result<CheckReport> {
    let mut tally = Tally::new();
    let mut eps_sum = 0.0;
    let mut worst_ratio = 0.0f64;
    for t in 1..=trace.len() {
        eps_sum += trace.iterate(t).eps;
        for i in 0..setup.num_blocks() {
            let bound =
                metrics::cpm_regret_bound(setup, &trace.initial_point, i, trace.eta, spec.gradient_bound(), eps_sum);
            let r = metrics::regret(trace, i, t)?;
            tally.record(r, bound, tol);
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(r / bound);
            }
        }
    }
    Ok(CheckReport::from_tally("constant regret bound", tally, format!("max regret / bound = {worst_ratio:.4}")))
}
