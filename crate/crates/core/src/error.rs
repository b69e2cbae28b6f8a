use thiserror::Error;

use crate::problem::AssumptionViolation;
use crate::vector::Vector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("assumption violated: {0}")]
    Assumption(AssumptionViolation),

    #[error("prox solver did not converge after {iterations} sweeps (last step {residual:e})")]
    ProxNotConverged {
        iterations: usize,
        residual: f64,
        last: Vector,
    },

    #[error("fixed-point iteration hit {iterations} iterations (last step {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("step size underflow at t = {t:e} (dt = {dt:e})")]
    StepUnderflow {
        t: f64,
        dt: f64,
        partial: Box<crate::integrate::Trajectory>,
    },

    #[error("iteration diverged at n = {n} (error {err:e}); try a smaller step size")]
    Divergence { n: usize, err: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
