use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("permutation is not a tree permutation")]
    NotATree,

    #[error("{op} requires n >= {min}, got n = {n}")]
    TooSmall { op: &'static str, n: usize, min: usize },

    #[error("n = {n} exceeds the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid tree code: {0}")]
    InvalidCode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("need at least {need} values, got {got}")]
    TooFewSamples { got: usize, need: usize },

    #[error("sample variance is zero")]
    DegenerateVariance,

    #[error("identity violated: {0}")]
    IdentityViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
