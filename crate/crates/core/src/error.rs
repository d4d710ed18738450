use thiserror::Error;

use crate::geometry::slicing::SlicePiece;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy not reached: {0}")]
    Accuracy(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    /// Slicing stopped at `max_depth` with pieces still thicker than the slab.
    #[error("slicing incomplete: {} piece(s) still thick at max depth", thick.len())]
    PartialSlicing {
        pieces: Vec<SlicePiece>,
        thick: Vec<SlicePiece>,
    },

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
