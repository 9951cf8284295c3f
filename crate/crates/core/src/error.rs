use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("size index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("permutation enumeration limited to D <= {limit}, got D = {dim}")]
    PermutationGuard { dim: usize, limit: usize },

    #[error("dense kernel of {elements} elements exceeds budget of {budget}; reduce N")]
    BudgetExceeded { elements: u128, budget: u128 },

    #[error("mode size mismatch: kernel has N = {kernel}, state has N = {state}")]
    SizeMismatch { kernel: usize, state: usize },

    #[error("no collision orders configured")]
    NoCollisionOrders,

    #[error("N = {n} is not divisible by P = {workers}; pad N to a multiple of {workers}")]
    Partition { n: usize, workers: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("non-finite value in right-hand side at step {step}")]
    NonFinite { step: usize },

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
