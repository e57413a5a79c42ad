//! Error taxonomy shared by every module.
//!
//! Callers can rely on the variant to pick an exit path: `Parse` means a file
//! or literal was malformed, `Resource` means a configured size limit was hit,
//! and the remaining variants flag semantic problems with otherwise
//! well-formed input.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed text input. `line` and `column` are 1-based; column is a
    /// best-effort token position.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Well-formed input that violates a precondition (unknown node,
    /// overlapping sets, empty set where one is required, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// Input that breaks a structural invariant, e.g. a directed cycle.
    #[error("structural error: {0}")]
    Structure(String),

    /// A configured size or search budget was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An internal consistency check failed; indicates a bug or an oracle
    /// that answered inconsistently.
    #[error("logic error: {0}")]
    Logic(String),

    /// Exact arithmetic hit an impossible state (e.g. a singular matrix that
    /// positive definiteness should have ruled out).
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    /// Rewrites the line number of a `Parse` error, leaving other variants
    /// untouched. Used when a nested literal is parsed inside a larger file.
    pub fn at_line(self, line: usize) -> Self {
        match self {
            Error::Parse {
                column, message, ..
            } => Error::Parse {
                line,
                column,
                message,
            },
            other => other,
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
