use thiserror::Error;

use crate::scalar::Mode;
use crate::tensor::Grade;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("grade mismatch: expected {expected}, found {found}")]
    GradeMismatch { expected: Grade, found: Grade },

    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("scalar mode mismatch: {left} vs {right}")]
    ModeMismatch { left: Mode, right: Mode },

    #[error("slot {slot} out of range for {kind} side of size {size}")]
    SlotOutOfRange { slot: usize, size: usize, kind: &'static str },

    #[error("permutation of size {found} does not match {expected} slots")]
    PermutationSize { expected: usize, found: usize },

    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("coordinate space n^(k+l) for n = {n}, grade {grade} is too large")]
    GradeTooLarge { n: usize, grade: Grade },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not supported in {1} mode")]
    UnsupportedMode(String, Mode),

    #[error("group {0} has no compact sampler")]
    NotCompact(String),

    #[error("monte carlo rank unstable between batches: {first} vs {second}")]
    InsufficientSamples { first: usize, second: usize },

    #[error("empty element list")]
    EmptyGroup,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
