use thiserror::Error;

use crate::weyl::Space;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index ({i},{j}) out of range for dimension {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("operands live in different spaces: {left} vs {right}")]
    SpaceMismatch { left: Space, right: Space },

    #[error("n = {n} exceeds the configured maximum of {max} (raise it with --max-n)")]
    TooLarge { n: usize, max: usize },

    #[error("invalid object: {}", .0.join("; "))]
    InvalidObject(Vec<String>),

    #[error("invalid contraction set: {0}")]
    InvalidContraction(String),

    #[error("the involution is only defined on bad pairs")]
    GoodPair,

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
