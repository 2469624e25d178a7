use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("incompatible congruence system: {0}")]
    IncompatibleSystem(String),
    #[error("no primes guaranteed: {0}")]
    NoPrimesGuaranteed(String),
    #[error("search budget exhausted: {0}")]
    Budget(String),
    #[error("outside theorem hypotheses: {0}")]
    HypothesisViolation(String),
    #[error("epsilon undefined: all row coefficients vanish")]
    UndefinedEpsilon,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::ResourceLimit(_) => "resource-limit",
            Error::Unsupported(_) => "unsupported-input",
            Error::IncompatibleSystem(_) => "incompatible-system",
            Error::NoPrimesGuaranteed(_) => "no-primes-guaranteed",
            Error::Budget(_) => "budget",
            Error::HypothesisViolation(_) => "hypothesis-violation",
            Error::UndefinedEpsilon => "undefined-epsilon",
            Error::Precondition(_) => "precondition",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
