//! Exact arithmetic and linear algebra over the prime field GF(p).
//!
//! Everything here is exact: elements are residues stored in a `u64` and
//! the modulus is capped at [`MAX_PRIME`], so every intermediate product
//! fits in 64 bits.

mod element;
mod matrix;
mod prime;

pub use element::{field_arith, FieldElement, FieldOp};
pub use matrix::FieldMatrix;
pub use prime::{is_prime, smallest_valid_prime, PrimeModulus, MAX_PRIME};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum {MAX_PRIME}")]
    ModulusTooLarge(u64),
    #[error("division by zero in GF({0})")]
    DivisionByZero(u64),
    #[error("operands live in different fields: GF({left}) vs GF({right})")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("system has no unique solution (rank {rank}, {rows}x{cols})")]
    NoUniqueSolution { rank: usize, rows: usize, cols: usize },
    #[error("system is inconsistent")]
    Inconsistent,
    #[error("evaluation points are not mutually distinct")]
    DuplicatePoints,
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
}
