use thiserror::Error;

/// Library error taxonomy. `Hypothesis` marks inputs that violate a
/// precondition of one of the realizability results (the CLI maps these to
/// exit code 2); `Numerical` marks solver failures (exit code 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
