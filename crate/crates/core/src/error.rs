use thiserror::Error;

/// Errors surfaced by the library.
///
/// Every variant maps to a stable machine-readable kind string (see
/// [`Error::kind`]) so that front ends can emit structured error objects.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two values that must share parameters (field, truncation, type data) do not.
    #[error("structural mismatch: {0}")]
    Structural(String),
    /// A module with a zero structure constant, or an otherwise degenerate object.
    #[error("degenerate module: {0}")]
    Degenerate(String),
    /// A sequence that does not satisfy the required base-p congruence.
    #[error("not in kernel: {0}")]
    NotInKernel(String),
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An enumeration guard or integer-width limit was hit.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A series is not known to sufficient precision for the operation.
    #[error("insufficient truncation: {0}")]
    Truncation(String),
    /// Syntactically invalid external input (JSON shape, flag format).
    #[error("malformed input: {0}")]
    Malformed(String),
    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Stable identifier for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Structural(_) => "structural",
            Error::Degenerate(_) => "degenerate-module",
            Error::NotInKernel(_) => "not-in-kernel",
            Error::Domain(_) => "domain",
            Error::Resource(_) => "resource",
            Error::Truncation(_) => "truncation",
            Error::Malformed(_) => "malformed-input",
            Error::Internal(_) => "internal",
        }
    }

    /// Detail message without the category prefix.
    pub fn detail(&self) -> &str {
        match self {
            Error::Structural(s)
            | Error::Degenerate(s)
            | Error::NotInKernel(s)
            | Error::Domain(s)
            | Error::Resource(s)
            | Error::Truncation(s)
            | Error::Malformed(s)
            | Error::Internal(s) => s,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
