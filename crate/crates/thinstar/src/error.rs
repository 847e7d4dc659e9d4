use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the command line to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Solver,
    Degenerate,
    MissingConstants,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("eigenvalue {index} is degenerate or nearly so (relative gap {gap:.3e})")]
    Degenerate { index: usize, gap: f64 },

    #[error("node constants unavailable from exponent {exponent} on ({what})")]
    MissingConstants { exponent: String, what: String },

    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Io { .. } | Error::Json(_) => ErrorKind::Config,
            Error::Solver(_) => ErrorKind::Solver,
            Error::Degenerate { .. } => ErrorKind::Degenerate,
            Error::MissingConstants { .. } => ErrorKind::MissingConstants,
        }
    }
}
