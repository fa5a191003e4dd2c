//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
///
/// Operations that can fail return `Result<T, Error>`; the variants are
/// coarse-grained on purpose — callers normally either propagate or print.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A coordinate was expected to lie on a grid point but does not.
    #[error("grid alignment error: {0}")]
    GridAlignment(String),

    /// The input is structurally degenerate (tied maxima, empty support, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A rejection sampler exhausted its proposal budget.
    /// Carries the number of attempts actually made.
    #[error("rejection budget of {attempts} proposals exhausted")]
    RejectionBudget { attempts: u64 },

    /// A numerical routine (eigensolver, inverse CDF, message passing)
    /// failed to produce a usable result.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Input/output failure while (de)serializing.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn alignment(msg: impl Into<String>) -> Self {
        Error::GridAlignment(msg.into())
    }
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
