use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDist(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("joint enumeration needs {needed} outcomes, cap is {cap}")]
    EnumerationTooLarge { needed: u128, cap: u128 },
    #[error("oracle state space needs {needed} states, cap is {cap}")]
    StateSpaceTooLarge { needed: u128, cap: u128 },
    #[error("linear program is infeasible")]
    LpInfeasible,
    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("simplex stalled after {0} pivots")]
    LpStalled(usize),
    #[error("metric consistency: {0}")]
    BrokenMetric(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
