use thiserror::Error;

/// Errors produced by the transforms, norms and the verification harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group size {0}: must be at least 1")]
    InvalidSize(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("invalid exponent {value}: {reason}")]
    Exponent { value: f64, reason: &'static str },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("weight parameter {0} is outside the polynomial family (s must be >= 0)")]
    OutOfFamily(f64),

    #[error("block size {block} does not divide group size {n}")]
    Partition { block: usize, n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{routine} did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    NoConvergence {
        routine: &'static str,
        sweeps: usize,
        off: f64,
    },

    #[error("resource limit: {what} needs n <= {cap}, got n = {n}")]
    Resource { what: String, n: usize, cap: usize },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
