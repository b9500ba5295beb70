use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u32),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid module: {0}")]
    InvalidModule(String),

    #[error("not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("degree {degree} is outside the window [{lo}, {hi}]")]
    Window { degree: i32, lo: i32, hi: i32 },

    #[error("size budget exceeded: {0}")]
    SizeBudget(String),

    #[error("backend unavailable: {0}")]
    Backend(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Invalid(String),

    /// An equation that is solvable by theory had no solution.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
