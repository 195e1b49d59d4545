use thiserror::Error;

/// Errors reported by the library. Precondition failures and falsification
/// events are kept apart so callers can map them to different exit codes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("{0} does not divide {1}")]
    NotADivisor(u64, u64),
    #[error("Φ_{0} does not divide the multiset")]
    NotDivisible(u64),
    #[error("{prime} divides the cardinality {cardinality}")]
    CardinalityDivisible { prime: u64, cardinality: i64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("scale guard exceeded: {0}")]
    Guard(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("falsification: {0}")]
    Falsified(String),
    #[error("certificate rejected: {0}")]
    Rejected(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_falsification(&self) -> bool {
        matches!(self, Error::Falsified(_) | Error::Internal(_))
    }
}
