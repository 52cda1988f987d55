use thiserror::Error;

/// Errors produced by the tail-probability routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("{op}: domain error: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A structurally invalid argument (bad threshold, bad tolerance, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative solver hit its iteration cap.
    #[error("{op}: no convergence after {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },

    #[error("empty input")]
    EmptyInput,

    /// The brute-force enumeration cap leaves too much probability mass out.
    #[error("cap {cap} too small: omitted mass bound {bound:e} exceeds {limit:e}")]
    CapTooSmall { cap: u64, bound: f64, limit: f64 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    /// Short machine-readable tag, used by the CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NoConvergence { .. } => "no-convergence",
            Error::EmptyInput => "empty-input",
            Error::CapTooSmall { .. } => "cap-too-small",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
