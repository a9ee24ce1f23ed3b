use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the range an operation accepts.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was asked to do something that does not apply to its input,
    /// e.g. a column weight for a Bernoulli design.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("shape mismatch: design has {expected} tests but outcome vector has {found}")]
    ShapeMismatch { expected: usize, found: usize },

    /// Outcomes that no defective set could have produced.
    #[error("outcomes are not consistent with any defective set (positive test {test} contains no possible defective)")]
    Inconsistent { test: usize },

    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
