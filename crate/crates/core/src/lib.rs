//! Conceptual prox method with approximate fixed points for convex games.
//!
//! The crate computes low-regret trajectories and coarse correlated equilibria
//! with Clairvoyant OMD (prox-method iterates solved by contraction) and its
//! closed-form specialization for normal-form games, Clairvoyant MWU.
//!
//! It is `no_std` (with `alloc`) when the default `std` feature is disabled.
//! File formats, the command line runner and anything else touching IO live
//! in the companion `cpm-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod checks;
pub mod error;
pub mod game;
pub mod linalg;
mod math;
pub mod metrics;
pub mod point;
pub mod proximal;
pub mod sampling;
pub mod solver;
pub mod trace;

pub use error::{CpmError, Result};
pub use game::{Domain, GameOracle, GameSpec, NormalFormGame};
pub use point::{BlockVec, JointPoint};
pub use proximal::{NormKind, ProximalSetup, Regularizer};
pub use solver::{EtaChoice, InnerMode, SolverConfig, ToleranceSchedule};
pub use trace::{OuterIterate, RunTrace};
