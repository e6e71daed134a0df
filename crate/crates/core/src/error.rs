use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("probability {value} outside the admissible range {range}")]
    InvalidProbability { value: f64, range: &'static str },

    /// Row `g2_row` of G2 and row `h1_row` of H1 have odd overlap.
    #[error("CSS condition violated: G2 row {g2_row} anticommutes with H1 row {h1_row}")]
    CssViolation { g2_row: usize, h1_row: usize },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("syndrome is not in the column space of the check matrix")]
    NoSolution,

    #[error("instance too large for exhaustive enumeration: {what} = {value} exceeds {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("estimate does not reproduce the syndrome of the true error")]
    SyndromeMismatch,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
