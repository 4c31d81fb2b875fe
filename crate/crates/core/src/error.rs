use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// `1 - gamma_l * S_l` collapsed for an active basis; the candidate is skipped.
    #[error("numerical degeneracy at basis {index}")]
    Degenerate { index: usize },

    /// Rank-one bookkeeping lost positive definiteness; caller rebuilds from scratch.
    #[error("posterior state corrupted: {0}")]
    StateCorruption(String),

    #[error("linear system could not be factorized: {0}")]
    Singular(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
