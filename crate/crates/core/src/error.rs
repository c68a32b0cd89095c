use alloc::boxed::Box;
use alloc::string::String;

use crate::point::JointPoint;
use crate::trace::RunTrace;

pub type Result<T, E = CpmError> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CpmError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("outer iteration {outer} failed: {source}")]
    AtIteration {
        outer: usize,
        #[source]
        source: Box<CpmError>,
    },
    #[error(
        "fixed-point iteration did not reach tolerance {} at outer iteration {} \
         after {} map applications (residual {:e})",
        .0.tolerance, .0.outer, .0.iterations, .0.residual
    )]
    Convergence(Box<ConvergenceFailure>),
}

/// Inner loop gave up before meeting its tolerance. Usually means the step
/// size is too large for the game or the reported Lipschitz constant is too
/// small.
#[derive(Debug)]
pub struct ConvergenceFailure {
    /// Outer iteration (1-based) that failed; 0 when the inner solver was
    /// called on its own.
    pub outer: usize,
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    /// Iterate with the smallest residual seen.
    pub best: JointPoint,
    /// Outer iterations completed before the failure.
    pub partial_trace: Option<RunTrace>,
}

impl CpmError {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        CpmError::Shape(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CpmError::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        CpmError::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CpmError::Config(msg.into())
    }

    pub fn is_convergence_failure(&self) -> bool {
        matches!(self, CpmError::Convergence(_))
    }
}
