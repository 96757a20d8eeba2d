use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid tree type: {0}")]
    InvalidType(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("polynomial {0} is not divisible by {1}")]
    NotDivisible(String, String),

    #[error("integer overflow in lattice arithmetic")]
    Overflow,

    #[error("invalid accompanying sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("automorphism group of order {order} exceeds enumeration cap {cap}")]
    AutCapExceeded { order: String, cap: u64 },

    #[error("moduli dimension refused: {0}")]
    Refused(String),
}
