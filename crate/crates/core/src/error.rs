use thiserror::Error;

/// Errors raised by the toolkit's operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ground size {n} outside supported range 1..={max}")]
    GroundSize { n: usize, max: usize },

    #[error("mask {mask:#x} has bits outside a ground set of size {n}")]
    MaskOutOfRange { mask: u64, n: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("element {element} outside 1..={n}")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("compression needs distinct elements, got i = j = {0}")]
    EqualElements(usize),

    #[error("ground size mismatch: {0} vs {1}")]
    GroundMismatch(usize, usize),

    #[error("invalid tower: {0}")]
    InvalidTower(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not an up-set")]
    NotUpset,

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("search inconsistency: {0}")]
    Inconsistent(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
