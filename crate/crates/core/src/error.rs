use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation (bad index, wrong shape, missing edge).
    #[error("domain error: {0}")]
    Domain(String),

    /// A model violates one of its structural invariants.
    #[error("invalid model: {0}")]
    Model(String),

    /// A documented precondition of the call does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The category graph has a shape the requested algorithm does not handle.
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    /// An iterative routine hit its iteration cap.
    #[error("no convergence after {iterations} iterations: {what}")]
    Convergence { what: String, iterations: usize },

    /// The EM log-likelihood decreased between iterations.
    #[error("log-likelihood decreased at iteration {iteration}: {before} -> {after}")]
    NonMonotone {
        iteration: usize,
        before: f64,
        after: f64,
    },

    /// Bad experiment or CLI configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Convergence { .. } | Error::NonMonotone { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
