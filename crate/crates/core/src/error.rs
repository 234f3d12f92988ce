use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit status: 2 for bad input, 3 for solver failure, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Dimension { .. } | Error::Parse(_) => 2,
            Error::Factorization(_) | Error::NoConvergence(_) => 3,
            Error::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid",
            Error::Dimension { .. } => "dimension",
            Error::Parse(_) => "parse",
            Error::Factorization(_) => "factorization",
            Error::NoConvergence(_) => "no_convergence",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
