//! Error types shared across the crate, grouped by subsystem.

use thiserror::Error;

/// Failures of coefficient-ring operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not invertible in its ring: {0}")]
    NotInvertible(String),
}

/// Failures of operations in the truncated operator ring.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("operator order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("operator has a nonzero constant term; exp is defined only for nilpotent arguments")]
    NonzeroConstantTerm,
    #[error("constant term is not invertible: {0}")]
    NonInvertibleConstant(CoeffError),
}

/// Failures while building moment sequences and compound characters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompoundError {
    #[error("moment sequence has {got} entries, need at least {need}")]
    InsufficientMoments { need: usize, got: usize },
    #[error("moment sequence must start with mu_0 = 1")]
    BadZerothMoment,
    #[error("invalid count law: {0}")]
    InvalidCount(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Failures of the tail calculus and expansion construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TailsError {
    #[error("summand tail exponent must be positive, got {0}")]
    InvalidAlpha(String),
    #[error("summand family is not admissible: {0}")]
    NotAdmissible(String),
    #[error("expansion order {got} exceeds the supported maximum {max}")]
    OrderTooLarge { got: usize, max: usize },
    #[error("exact expansion requires 1/alpha to be a positive integer, got alpha = {0}")]
    InexactMoments(String),
    #[error("expansion has parametric coefficients; a parameter value is required")]
    MissingParameter,
    #[error("expansion has no formal parameter; do not pass one")]
    UnexpectedParameter,
    #[error("evaluation point must be positive, got {0}")]
    InvalidEvaluationPoint(f64),
    #[error(transparent)]
    Compound(#[from] CompoundError),
}

/// Failures of the numeric oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("count law not supported by this oracle path: {0}")]
    UnsupportedCount(String),
    #[error("quadrature tolerance not achieved: requested {requested:e}, estimated {estimated:e} (best value {best:e})")]
    ToleranceNotAchieved {
        requested: f64,
        estimated: f64,
        best: f64,
    },
    #[error("verification requires a numeric count parameter")]
    FormalParameter,
    #[error(transparent)]
    Tails(#[from] TailsError),
}
