use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("cannot raise zero to a non-positive power {0}")]
    ZeroPower(String),

    #[error("division by zero value")]
    DivisionByZero,

    #[error("exponent denominator {denominator} exceeds the configured cap {cap}")]
    DenominatorCap { denominator: u64, cap: u64 },

    #[error("r-power class is degenerate for r = 1")]
    DegenerateClass,

    /// An input violates a named structural invariant.
    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant {
        invariant: &'static str,
        detail: String,
    },

    #[error("point outside the skeleton: {0}")]
    OutsideSkeleton(String),

    #[error("coefficient quotient leaves the finite-sum model: {0}")]
    InexactDivision(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            invariant,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
