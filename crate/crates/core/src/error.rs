use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum GibbsError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A lookup outside the range covered by a precomputed table.
    #[error("index error: ({n}, {k}) is not covered by a table of size {max_n}")]
    Index { n: usize, k: usize, max_n: usize },

    /// A request that would exceed a configured size cap.
    #[error("resource error: {what} requires {requested}, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    /// Extended-precision evaluation lost too many bits to cancellation.
    #[error("precision error: only {bits} significant bits survive in {what}")]
    Precision { what: String, bits: i64 },

    /// A numeric quantity fell outside the supported range.
    #[error("range error: {0}")]
    Range(String),

    /// Malformed or inconsistent user input (datasets, specs, flags).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("empty distribution")]
    EmptyDistribution,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GibbsError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GibbsError::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        GibbsError::Validation(msg.into())
    }

    /// Process exit code used by the command-line workbench.
    pub fn exit_code(&self) -> i32 {
        match self {
            GibbsError::Validation(_) | GibbsError::Io(_) | GibbsError::Json(_) | GibbsError::EmptyDistribution => 2,
            GibbsError::Domain(_)
            | GibbsError::Index { .. }
            | GibbsError::Resource { .. }
            | GibbsError::Precision { .. }
            | GibbsError::Range(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, GibbsError>;
