//! Regularizers, Bregman divergences, the product norm pair, and the
//! composite prox operator
//! `prox_z(g) = argmin_{x in Z} <g, x> + D(x || z)`.
//!
//! Simplex players use negative entropy (1-strongly convex in l1), ball and
//! box players use half the squared Euclidean norm (1-strongly convex in l2).
//! The product norms are `sqrt(sum_i ||z_i||_1^2)` / `sqrt(sum_i ||g_i||_inf^2)`
//! for all-simplex setups and plain l2 for all-Euclidean ones. Mixing the two
//! kinds is rejected: no single norm pair makes both regularizers 1-strongly
//! convex while keeping the usual constants for `F`.
//!
//! All logarithms are natural.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CpmError, Result};
use crate::game::{Domain, GameSpec};
use crate::math;
use crate::point::{BlockVec, JointPoint};

/// Probabilities are floored here before logs, and entropy prox outputs are
/// kept at or above it so they remain valid prox centres.
pub const MIN_PROB: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularizer {
    /// `sum_a x[a] ln x[a]` on the simplex.
    NegativeEntropy,
    /// `||x||_2^2 / 2` on a ball or box.
    SquaredEuclidean,
}

impl Regularizer {
    pub fn for_domain(domain: &Domain) -> Self {
        match domain {
            Domain::Simplex { .. } => Regularizer::NegativeEntropy,
            Domain::Ball { .. } | Domain::Box { .. } => Regularizer::SquaredEuclidean,
        }
    }

    /// Modulus of strong convexity with respect to the block norm.
    pub fn strong_convexity(&self) -> f64 {
        1.0
    }

    /// Norm in which the regularizer is 1-strongly convex.
    pub fn block_norm(&self, x: &[f64]) -> f64 {
        match self {
            Regularizer::NegativeEntropy => x.iter().map(|v| v.abs()).sum(),
            Regularizer::SquaredEuclidean => l2(x),
        }
    }

    pub fn block_dual_norm(&self, g: &[f64]) -> f64 {
        match self {
            Regularizer::NegativeEntropy => g.iter().fold(0.0, |m, v| m.max(v.abs())),
            Regularizer::SquaredEuclidean => l2(g),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `(sqrt(sum ||.||_1^2), sqrt(sum ||.||_inf^2))`.
    SimplexProduct,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProximalSetup {
    domains: Vec<Domain>,
    regularizers: Vec<Regularizer>,
    norm: NormKind,
}

impl ProximalSetup {
    pub fn new(domains: Vec<Domain>) -> Result<Self> {
        if domains.is_empty() {
            return Err(CpmError::domain("proximal setup needs at least one block"));
        }
        for d in &domains {
            d.validate()?;
        }
        let regularizers: Vec<Regularizer> = domains.iter().map(Regularizer::for_domain).collect();
        let norm = if regularizers.iter().all(|r| *r == Regularizer::NegativeEntropy) {
            NormKind::SimplexProduct
        } else if regularizers.iter().all(|r| *r == Regularizer::SquaredEuclidean) {
            NormKind::Euclidean
        } else {
            return Err(CpmError::Unsupported("mixed simplex and Euclidean players have no common norm pair".into()));
        };
        Ok(Self { domains, regularizers, norm })
    }

    pub fn for_spec(spec: &GameSpec) -> Result<Self> {
        Self::new(spec.domains().to_vec())
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn regularizers(&self) -> &[Regularizer] {
        &self.regularizers
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn num_blocks(&self) -> usize {
        self.domains.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.domains.iter().map(Domain::dim).collect()
    }

    pub fn center_point(&self) -> JointPoint {
        JointPoint::new(self.domains.iter().map(Domain::center).collect())
    }

    pub fn primal_norm(&self, z: &BlockVec) -> f64 {
        match self.norm {
            NormKind::SimplexProduct => math::sqrt(
                z.blocks()
                    .iter()
                    .map(|b| {
                        let s: f64 = b.iter().map(|v| v.abs()).sum();
                        s * s
                    })
                    .sum(),
            ),
            NormKind::Euclidean => l2(&z.flatten()),
        }
    }

    pub fn dual_norm(&self, g: &BlockVec) -> f64 {
        match self.norm {
            NormKind::SimplexProduct => math::sqrt(
                g.blocks()
                    .iter()
                    .map(|b| {
                        let m = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        m * m
                    })
                    .sum(),
            ),
            NormKind::Euclidean => l2(&g.flatten()),
        }
    }

    /// `max ||z - z'||` over the joint domain in the primal norm; `2 sqrt(n)`
    /// for simplex products.
    pub fn domain_diameter(&self) -> f64 {
        match self.norm {
            NormKind::SimplexProduct => 2.0 * math::sqrt(self.domains.len() as f64),
            NormKind::Euclidean => math::sqrt(
                self.domains
                    .iter()
                    .map(|d| match d {
                        Domain::Ball { radius, .. } => 4.0 * radius * radius,
                        Domain::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| (u - l) * (u - l)).sum(),
                        Domain::Simplex { .. } => unreachable!("homogeneous setup"),
                    })
                    .sum(),
            ),
        }
    }

    /// `D_i(x || center)`.
    pub fn block_divergence(&self, player: usize, x: &[f64], center: &[f64]) -> Result<f64> {
        if x.len() != center.len() || x.len() != self.domains[player].dim() {
            return Err(CpmError::shape(format!(
                "divergence arguments of lengths {} and {} for a block of dimension {}",
                x.len(),
                center.len(),
                self.domains[player].dim()
            )));
        }
        match self.regularizers[player] {
            Regularizer::NegativeEntropy => kl_divergence(x, center),
            Regularizer::SquaredEuclidean => {
                Ok(0.5 * x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            }
        }
    }

    /// `D(z || center) = sum_i D_i(z_i || center_i)`.
    pub fn divergence(&self, z: &JointPoint, center: &JointPoint) -> Result<f64> {
        let dims = self.dims();
        z.check_dims(&dims, "point")?;
        center.check_dims(&dims, "centre")?;
        (0..self.num_blocks()).map(|i| self.block_divergence(i, z.block(i), center.block(i))).sum()
    }

    /// `max_{x in X_i} D_i(x || center)`. For entropy this is
    /// `-ln(min_a center[a])`, attained at a vertex (`ln d` from uniform).
    pub fn divergence_range(&self, player: usize, center: &[f64]) -> f64 {
        match &self.domains[player] {
            Domain::Simplex { .. } => {
                let m = center.iter().copied().fold(f64::INFINITY, f64::min);
                -math::ln(m.max(MIN_PROB))
            }
            Domain::Ball { radius, .. } => {
                let r = radius + l2(center);
                0.5 * r * r
            }
            Domain::Box { lower, upper } => {
                0.5 * center
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(c, (l, u))| {
                        let w = (c - l).abs().max((u - c).abs());
                        w * w
                    })
                    .sum::<f64>()
            }
        }
    }

    /// Prox step on one block: `argmin_{x in X_i} eta <g, x> + D_i(x || center)`.
    pub fn prox_block(&self, player: usize, center: &[f64], g: &[f64], eta: f64) -> Result<Vec<f64>> {
        check_step(eta)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(CpmError::input("prox gradient has non-finite entries"));
        }
        let domain = &self.domains[player];
        if center.len() != domain.dim() || g.len() != domain.dim() {
            return Err(CpmError::shape(format!(
                "prox arguments of lengths {} and {} for a block of dimension {}",
                center.len(),
                g.len(),
                domain.dim()
            )));
        }
        Ok(match domain {
            Domain::Simplex { .. } if g.iter().all(|&v| v == 0.0) => center.to_vec(),
            Domain::Simplex { .. } => {
                let logits: Vec<f64> =
                    center.iter().zip(g).map(|(&c, &gi)| math::ln(c.max(MIN_PROB)) - eta * gi).collect();
                softmax(&logits)
            }
            Domain::Ball { radius, .. } => {
                let y: Vec<f64> = center.iter().zip(g).map(|(c, gi)| c - eta * gi).collect();
                project_ball(y, *radius)
            }
            Domain::Box { lower, upper } => center
                .iter()
                .zip(g)
                .zip(lower.iter().zip(upper))
                .map(|((c, gi), (l, u))| (c - eta * gi).clamp(*l, *u))
                .collect(),
        })
    }

    /// Composite prox over the joint space; decomposes into block proxes.
    pub fn prox(&self, center: &JointPoint, g: &BlockVec, eta: f64) -> Result<JointPoint> {
        let dims = self.dims();
        center.check_dims(&dims, "prox centre")?;
        g.check_dims(&dims, "prox gradient")?;
        let blocks = (0..self.num_blocks())
            .map(|i| self.prox_block(i, center.block(i), g.block(i), eta))
            .collect::<Result<Vec<_>>>()?;
        Ok(JointPoint::new(blocks))
    }

    pub fn contains(&self, z: &JointPoint, tol: f64) -> bool {
        z.num_blocks() == self.domains.len()
            && self.domains.iter().enumerate().all(|(i, d)| d.contains(z.block(i), tol))
    }
}

fn check_step(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 {
        Ok(())
    } else {
        Err(CpmError::input(format!("step size must be positive and finite, got {eta}")))
    }
}

fn l2(x: &[f64]) -> f64 {
    math::sqrt(x.iter().map(|v| v * v).sum())
}

/// Bregman divergence of negative entropy on the positive orthant:
/// `sum x ln(x / c) - x + c`, which is the KL divergence on the simplex.
fn kl_divergence(x: &[f64], center: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (&xa, &ca) in x.iter().zip(center) {
        if ca.is_nan() || ca <= 0.0 {
            return Err(CpmError::domain(format!("entropy divergence centre has a non-positive entry {ca}")));
        }
        if xa < 0.0 {
            return Err(CpmError::domain(format!("entropy divergence point has a negative entry {xa}")));
        }
        let ca = ca.max(MIN_PROB);
        if xa > 0.0 {
            total += xa * (math::ln(xa.max(MIN_PROB)) - math::ln(ca));
        }
        total += ca - xa;
    }
    Ok(total.max(0.0))
}

/// Normalized `exp(logits)` with max subtraction; entries floored at
/// [`MIN_PROB`].
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logits.iter().map(|l| math::exp(l - max)).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v = (*v / total).max(MIN_PROB);
    }
    w
}

fn project_ball(mut y: Vec<f64>, radius: f64) -> Vec<f64> {
    let norm = l2(&y);
    if norm > radius {
        let scale = radius / norm;
        y.iter_mut().for_each(|v| *v *= scale);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn simplex_setup(dims: &[usize]) -> ProximalSetup {
        ProximalSetup::new(dims.iter().map(|&dim| Domain::Simplex { dim }).collect()).unwrap()
    }

    #[test]
    fn divergence_examples() {
        let s = simplex_setup(&[4]);
        let z = JointPoint::new(vec![vec![0.1, 0.2, 0.3, 0.4]]);
        assert_eq!(s.divergence(&z, &z).unwrap(), 0.0);
        let vertex = JointPoint::new(vec![vec![1.0, 0.0, 0.0, 0.0]]);
        let uniform = s.center_point();
        let d = s.divergence(&vertex, &uniform).unwrap();
        assert!((d - 4f64.ln()).abs() < 1e-12, "{d}");

        let e = ProximalSetup::new(vec![Domain::Ball { dim: 2, radius: 1.0 }]).unwrap();
        let x = JointPoint::new(vec![vec![1.0, 0.0]]);
        let c = JointPoint::new(vec![vec![0.0, 0.0]]);
        assert_eq!(e.divergence(&x, &c).unwrap(), 0.5);
    }

    #[test]
    fn divergence_rejects_zero_centre() {
        let s = simplex_setup(&[2]);
        let z = JointPoint::new(vec![vec![0.5, 0.5]]);
        let c = JointPoint::new(vec![vec![1.0, 0.0]]);
        assert!(matches!(s.divergence(&z, &c), Err(CpmError::Domain(_))));
    }

    #[test]
    fn prox_examples() {
        let s = simplex_setup(&[2]);
        let c = JointPoint::new(vec![vec![0.5, 0.5]]);
        let zero = BlockVec::zeros(&[2]);
        assert_eq!(s.prox(&c, &zero, 0.7).unwrap(), c);

        let g = BlockVec::new(vec![vec![-2f64.ln(), 0.0]]);
        let p = s.prox(&c, &g, 1.0).unwrap();
        assert!((p.block(0)[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.block(0)[1] - 1.0 / 3.0).abs() < 1e-15);

        let b = ProximalSetup::new(vec![Domain::Ball { dim: 2, radius: 1.0 }]).unwrap();
        let p = b.prox(&JointPoint::new(vec![vec![0.0, 0.0]]), &BlockVec::new(vec![vec![-2.0, 0.0]]), 1.0).unwrap();
        assert_eq!(p.block(0), &[1.0, 0.0]);
    }

    #[test]
    fn prox_rejects_bad_inputs() {
        let s = simplex_setup(&[2]);
        let c = s.center_point();
        let g = BlockVec::new(vec![vec![f64::NAN, 0.0]]);
        assert!(matches!(s.prox(&c, &g, 1.0), Err(CpmError::Input(_))));
        assert!(s.prox(&c, &BlockVec::zeros(&[2]), 0.0).is_err());
        assert!(matches!(s.prox(&c, &BlockVec::zeros(&[3]), 1.0), Err(CpmError::Shape(_))));
    }

    #[test]
    fn box_prox_clamps() {
        let b = ProximalSetup::new(vec![Domain::Box { lower: vec![0.0, -1.0], upper: vec![1.0, 1.0] }]).unwrap();
        let p = b.prox(&b.center_point(), &BlockVec::new(vec![vec![-10.0, 0.25]]), 1.0).unwrap();
        assert_eq!(p.block(0), &[1.0, -0.25]);
    }

    #[test]
    fn extreme_gradients_stay_finite_and_positive() {
        let s = simplex_setup(&[3]);
        let c = s.center_point();
        let g = BlockVec::new(vec![vec![1e6, -1e6, 0.0]]);
        let p = s.prox(&c, &g, 1.0).unwrap();
        assert!(p.block(0).iter().all(|v| v.is_finite() && *v >= MIN_PROB));
        assert!((p.block(0).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_examples() {
        let s = simplex_setup(&[2, 2]);
        let v = BlockVec::new(vec![vec![1.0, -1.0], vec![0.5, 0.5]]);
        assert!((s.primal_norm(&v) - 5f64.sqrt()).abs() < 1e-15);
        assert!((s.dual_norm(&v) - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.primal_norm(&BlockVec::zeros(&[2, 2])), 0.0);
        assert_eq!(s.dual_norm(&BlockVec::zeros(&[2, 2])), 0.0);
    }

    #[test]
    fn diameters() {
        assert!((simplex_setup(&[2, 3]).domain_diameter() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((simplex_setup(&[2, 2, 2]).domain_diameter() - 2.0 * 3f64.sqrt()).abs() < 1e-15);
        let b = ProximalSetup::new(vec![Domain::Ball { dim: 3, radius: 1.0 }]).unwrap();
        assert_eq!(b.domain_diameter(), 2.0);
    }

    #[test]
    fn mixed_setups_are_unsupported() {
        let err = ProximalSetup::new(vec![Domain::Simplex { dim: 2 }, Domain::Ball { dim: 2, radius: 1.0 }]);
        assert!(matches!(err, Err(CpmError::Unsupported(_))));
    }

    #[test]
    fn divergence_range_from_uniform_is_log_d() {
        let s = simplex_setup(&[5]);
        let r = s.divergence_range(0, &[0.2; 5]);
        assert!((r - 5f64.ln()).abs() < 1e-12);
        let b = ProximalSetup::new(vec![Domain::Ball { dim: 2, radius: 1.0 }]).unwrap();
        assert_eq!(b.divergence_range(0, &[0.0, 0.0]), 0.5);
    }
}
