use thiserror::Error;

use crate::construction::{RoundingOutcome, SamplingDiagnostics};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("operands live in different spaces")]
    SpaceMismatch,

    #[error("coordinate error: {0}")]
    Coordinate(String),

    #[error("invalid function value {value} at index {index}")]
    InvalidValue { index: usize, value: f64 },

    #[error("{what} budget exceeded: needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("result is not real: imaginary residue {residue:e}")]
    NonRealResult { residue: f64 },

    #[error("regularity certificate failed: achieved gap {gap} exceeds delta {delta}")]
    CertificationFailed { gap: f64, delta: f64 },

    #[error("degenerate subspace of size {size}: {reason}")]
    DegenerateSubspace { size: usize, reason: String },

    #[error("increment precondition failed: mean nontrivial 3-AP density {mean_lambda} is not below {threshold}")]
    PreconditionFailed { mean_lambda: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("direction sampling exhausted: {0}")]
    SamplingExhausted(Box<SamplingDiagnostics>),

    #[error("rounding retries exhausted after {} attempts (best density deviation {}, best 3-AP deviation {})",
        .0.attempts, .0.density_deviation, .0.max_rho_deviation)]
    RetriesExhausted(Box<RoundingOutcome>),
}

pub type Result<T> = std::result::Result<T, Error>;
