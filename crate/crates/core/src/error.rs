use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("no positivity threshold found for the branching mechanism")]
    NoPositivityThreshold,

    #[error("v from infinity undefined: Grey's condition does not hold ({0})")]
    GreyFails(String),

    #[error("numerical procedure did not converge: {0}")]
    NoConvergence(String),

    #[error("state 0 is polar (or Z = {{0}}): {0}")]
    Polar(String),

    #[error("g_inf undefined (unbounded zero set): {0}")]
    NotTransient(String),

    #[error("mismatched cutout sets: {0}")]
    Mismatch(String),

    #[error("epsilon too small for horizon: {expected:.3e} expected marks exceeds the limit {limit:.0e}")]
    TooManyMarks { expected: f64, limit: f64 },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
