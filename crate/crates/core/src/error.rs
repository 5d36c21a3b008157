use thiserror::Error;

/// Errors raised by the library. Each variant carries a stable code used by
/// the CLI and the JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not a prime power: {0}")]
    NotPrimePower(String),
    #[error("functional-equation form violated: {0}")]
    FormViolation(String),
    #[error("root bound violated: {0}")]
    RootBoundViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("too many generators: {0}")]
    TooManyGenerators(String),
    #[error("unsupported prime: {0}")]
    UnsupportedPrime(String),
    #[error("inadmissible: {0}")]
    Inadmissible(String),
    #[error("depth exhausted: {0}")]
    DepthExhausted(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NotPrimePower(_) => "not-prime-power",
            Error::FormViolation(_) => "form-violation",
            Error::RootBoundViolation(_) => "root-bound-violation",
            Error::Parse(_) => "parse-error",
            Error::TooManyGenerators(_) => "too-many-generators",
            Error::UnsupportedPrime(_) => "unsupported-prime",
            Error::Inadmissible(_) => "inadmissible",
            Error::DepthExhausted(_) => "depth-exhausted",
            Error::Overflow(_) => "arithmetic-overflow",
            Error::InternalInvariant(_) => "internal-invariant-violation",
        }
    }

    /// True for errors caused by the caller's input rather than by a bug.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::NotPrimePower(_)
                | Error::FormViolation(_)
                | Error::RootBoundViolation(_)
                | Error::Parse(_)
                | Error::TooManyGenerators(_)
                | Error::UnsupportedPrime(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn internal(msg: impl Into<String>) -> Error {
    Error::InternalInvariant(msg.into())
}
