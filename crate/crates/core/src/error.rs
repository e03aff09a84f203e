use thiserror::Error;

use crate::domain::CapacityViolation;

/// Errors shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("entry {index} is {value}, expected a finite nonnegative number")]
    InvalidEntry { index: usize, value: f64 },

    #[error("ground set size {0} is outside the supported range 1..=20")]
    GroundSetSize(usize),

    #[error("capacity has no value for subset {0:?}")]
    MissingSubset(Vec<usize>),

    #[error("subset {subset:?} does not fit a ground set of size {n}")]
    SubsetOutOfRange { subset: Vec<usize>, n: usize },

    #[error("invalid capacity: {0}")]
    InvalidCapacity(CapacityViolation),

    #[error("invalid base: {0}")]
    InvalidBase(String),

    #[error("weighting is undefined at {0:?}")]
    UndefinedWeight(Vec<f64>),

    #[error("weighting violates the boundary condition: {0}")]
    Boundary(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("search space of {size} candidates exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },

    #[error("malformed linear program: {0}")]
    MalformedProgram(String),

    #[error("simplex iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error("branch and bound exhausted its budget of {0} nodes")]
    BudgetExceeded(u64),

    #[error("level {value} lies beyond the last breakpoint {limit}")]
    LevelRange { value: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
