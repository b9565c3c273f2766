use thiserror::Error;

/// Errors produced by the analysis and optimization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("formula has no variables")]
    NoVariables,

    #[error("{what}: {n} variables exceeds the enumeration limit of {limit}")]
    LimitExceeded {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("formula is unsatisfiable")]
    Unsatisfiable,

    #[error("more than {limit} implicants generated; refusing to truncate")]
    PrimeImplicantOverflow { limit: usize },

    #[error("conditioning on an event of probability zero")]
    ZeroEvidence,

    #[error("not possible: {0}")]
    NotPossible(String),

    #[error("infeasible initialization: {0}")]
    InfeasibleInit(String),

    #[error("loss diverged to infinity at step {step}")]
    DivergedToInfiniteLoss { step: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
