//! Random feasible points, used by stochastic certificate checks.

use alloc::vec::Vec;

use rand::Rng;

use crate::game::Domain;
use crate::math;
use crate::point::JointPoint;

/// Uniform point of the probability simplex (flat Dirichlet).
pub fn simplex_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim).map(|_| -math::ln(1.0 - rng.gen::<f64>())).collect();
    let total: f64 = x.iter().sum();
    if total > 0.0 {
        x.iter_mut().for_each(|v| *v /= total);
    } else {
        x.iter_mut().for_each(|v| *v = 1.0 / dim as f64);
    }
    x
}

/// Strictly interior simplex point: a flat Dirichlet draw mixed with uniform.
pub fn interior_simplex_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, floor: f64) -> Vec<f64> {
    let x = simplex_point(rng, dim);
    let mix = (floor * dim as f64).min(1.0);
    x.into_iter().map(|v| (1.0 - mix) * v + mix / dim as f64).collect()
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
}

/// Uniform point of the origin-centred ball of `radius`.
pub fn ball_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
    let norm = math::sqrt(dir.iter().map(|x| x * x).sum());
    if norm == 0.0 {
        return alloc::vec![0.0; dim];
    }
    let scale = radius * math::powf(rng.gen::<f64>(), 1.0 / dim as f64) / norm;
    dir.into_iter().map(|x| x * scale).collect()
}

pub fn domain_point<R: Rng + ?Sized>(rng: &mut R, domain: &Domain) -> Vec<f64> {
    match domain {
        Domain::Simplex { dim } => simplex_point(rng, *dim),
        Domain::Ball { dim, radius } => ball_point(rng, *dim, *radius),
        Domain::Box { lower, upper } => {
            lower.iter().zip(upper).map(|(&lo, &hi)| lo + (hi - lo) * rng.gen::<f64>()).collect()
        }
    }
}

/// A random extreme point: a vertex for simplices and boxes, a sphere point
/// for balls.
pub fn domain_extreme_point<R: Rng + ?Sized>(rng: &mut R, domain: &Domain) -> Vec<f64> {
    match domain {
        Domain::Simplex { dim } => {
            let mut x = alloc::vec![0.0; *dim];
            x[rng.gen_range(0..*dim)] = 1.0;
            x
        }
        Domain::Ball { dim, radius } => {
            let dir: Vec<f64> = (0..*dim).map(|_| standard_normal(rng)).collect();
            let norm = math::sqrt(dir.iter().map(|x| x * x).sum()).max(f64::MIN_POSITIVE);
            dir.into_iter().map(|x| x * radius / norm).collect()
        }
        Domain::Box { lower, upper } => {
            lower.iter().zip(upper).map(|(&lo, &hi)| if rng.gen::<bool>() { hi } else { lo }).collect()
        }
    }
}

pub fn joint_point<R: Rng + ?Sized>(rng: &mut R, domains: &[Domain]) -> JointPoint {
    JointPoint::new(domains.iter().map(|d| domain_point(rng, d)).collect())
}

/// Feasible comparator: half the time an extreme point, otherwise a uniform
/// draw. Extreme points are where linear regret is maximized, so both kinds
/// are worth probing.
pub fn comparator<R: Rng + ?Sized>(rng: &mut R, domain: &Domain) -> Vec<f64> {
    if rng.gen::<bool>() {
        domain_extreme_point(rng, domain)
    } else {
        domain_point(rng, domain)
    }
}
