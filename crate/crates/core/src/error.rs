//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by constructors and calculators.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// Two objects that must share an alphabet do not.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// A scalar parameter lies outside its admissible range.
    #[error("parameter `{name}` out of domain: {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A materialized product alphabet would exceed the configured cap.
    #[error("capacity exceeded: {what} would have {size} states (cap {cap})")]
    Capacity {
        what: &'static str,
        size: u128,
        cap: usize,
    },

    /// A probability vector failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A kernel row failed validation.
    #[error("invalid kernel row {row}: {reason}")]
    InvalidKernelRow { row: usize, reason: String },

    /// Text input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
