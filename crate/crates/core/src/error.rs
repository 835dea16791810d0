use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid extension degree {0}")]
    InvalidDegree(u32),
    #[error("modulus is not a monic irreducible polynomial of the requested degree")]
    ReducibleModulus,
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("operands belong to different fields or are not reduced")]
    ContextMismatch,
    #[error("fields are not in an extension relationship: {0}")]
    NotAnExtension(String),
    #[error("block mismatch: {0}")]
    BlockMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("element is not a unit at the base point")]
    NotAUnit,
    #[error("local ring elements have different base points")]
    BasePointMismatch,
    #[error("coefficient lies outside the embedded base field")]
    NotInBaseField,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("commutative rank did not decrease ({before} -> {after})")]
    NoProgress { before: usize, after: usize },
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown example {0:?}")]
    UnknownExample(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
