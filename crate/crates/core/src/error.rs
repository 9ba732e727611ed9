use thiserror::Error;

use crate::group::Index;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("level {0} outside 1..=8")]
    LevelOutOfRange(u32),
    #[error("half-width {0} must be a power of two with 2 <= N <= 4096")]
    BadHalfWidth(usize),
    #[error("expected {expected} masses, got {got}")]
    MassLength { expected: usize, got: usize },
    #[error("mass at element {element} is {value}; masses must be positive and finite")]
    NonPositiveMass { element: usize, value: f64 },
    #[error("mass dynamic range {0:e} exceeds 1e12")]
    MassRange(f64),
    #[error("invalid covering family: {0}")]
    InvalidFamily(String),
    #[error("covering-family axiom violated: {0}")]
    AxiomViolation(String),
    #[error("index {index} outside {min}..={max}")]
    IndexOutOfRange { index: Index, min: Index, max: Index },
    #[error("element {0} is not in the group")]
    ElementOutOfRange(usize),
    #[error("average over an empty set")]
    EmptySet,
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("exponent must satisfy {0}")]
    BadExponent(&'static str),
    #[error("weight dynamic range {0:e} exceeds 1e12")]
    WeightRange(f64),
    #[error("operation not supported on this model: {0}")]
    Unsupported(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant failed: {0}")]
    Invariant(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
