//! Crate-wide error type.

use crate::formula::VariableId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A leaf or decision node reads a variable the assignment does not cover.
    #[error("assignment does not cover variable {0}")]
    MissingVariable(VariableId),

    /// A variable id lies outside the declared (n, d) grid.
    #[error("variable {var} out of range for n={n}, d={d}")]
    VariableOutOfRange { var: VariableId, n: usize, d: usize },

    /// A structural invariant of a formula or branching program is violated.
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    /// The formula contains gates the DeMorgan compiler does not accept.
    #[error("{found} gate is not DeMorgan; lower the formula to fan-in-2 AND/OR first")]
    NotDeMorgan { found: String },

    /// Parameter validation failure (dimensions, probabilities, thresholds).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The average-case construction only exists in the hard regime.
    #[error("instance regime is {regime}, not hard; consult classify_regime before building")]
    NotHardRegime { regime: String },

    /// Text format parse failure.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Enumeration limits exceeded.
    #[error("enumeration limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::InvalidStructure(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, message: msg.into() }
    }
}
