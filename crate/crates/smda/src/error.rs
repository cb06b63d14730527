use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition or type invariant.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solver failed to converge or produced non-finite values.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A data file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A finite (file-backed) sample source ran out of data mid-run.
    #[error("sample source exhausted at iteration {iteration}")]
    DataExhausted { iteration: u64 },

    /// The requested operation is not defined for this combination of inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The API was called in a way that cannot be satisfied (e.g. missing log).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for validation-type errors, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
