use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NonPrime(u64),
    #[error("field of order {what} exceeds the budget {budget}")]
    TooLarge { what: String, budget: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{d} does not divide {n}")]
    NotADivisor { d: u32, n: u32 },
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("the zero polynomial has no field of linearity")]
    ZeroPolynomial,
    #[error("scalar must be nonzero")]
    ZeroScalar,
    #[error("index set must be non-empty")]
    EmptyIndexSet,
    #[error("matrix order {0} is too small (need at least 4)")]
    TooSmall(u32),
    #[error("ambient spaces differ")]
    AmbientMismatch,
    #[error("subspace does not have maximum rank")]
    NotMaxRank,
    #[error("construction parameter must be nonzero: {0}")]
    ZeroParameter(&'static str),
    #[error("exponent {i} is not coprime to {n}")]
    BadExponent { i: u32, n: u32 },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),
    #[error("bad partner mode: {0}")]
    BadMode(String),
    #[error("vertex is not a point of the linear set")]
    VertexNotInSet,
    #[error("the two subspaces define different linear sets")]
    NotEqualSets,
    #[error("search of size {size} exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
