//! GF(2) linear algebra: packed bit vectors, sparse parity-check matrices,
//! alist code files and Toeplitz hashing.

mod alist;
mod block;
pub mod clmul;
mod matrix;
mod parity;
mod toeplitz;

pub use alist::{emit_alist, parse_alist};
pub use block::BitBlock;
pub use matrix::BitMatrix;
pub use parity::ParityCheck;
pub use toeplitz::{toeplitz_apply_fast, toeplitz_apply_naive, ToeplitzSeed};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitError {
    #[error("dimension mismatch: expected {expected} bits, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("expected {expected} bytes, got {actual}")]
    ByteLength { expected: usize, actual: usize },
    #[error("padding bits past the declared length are not zero")]
    NonZeroPadding,
    #[error("invalid matrix: {0}")]
    Matrix(String),
}

/// alist parse failure; `line` is 1-based.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("alist line {line}: {message}")]
pub struct AlistError {
    pub line: usize,
    pub message: String,
}
