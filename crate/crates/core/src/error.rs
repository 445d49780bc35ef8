use thiserror::Error;

use crate::precision::Precision;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry {index} at ({row}, {col}) is out of range for a {n}x{n} matrix")]
    IndexOutOfRange {
        index: usize,
        row: usize,
        col: usize,
        n: usize,
    },

    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("precision mismatch: expected {expected}, got {actual}")]
    PrecisionMismatch {
        expected: Precision,
        actual: Precision,
    },

    #[error("grid size nx = {0} is too small (need nx >= 2)")]
    GridTooSmall(usize),

    #[error("Matrix Market line {line}: {message}")]
    MatrixMarket { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("right-hand side is zero")]
    ZeroRhs,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("Hessenberg least-squares breakdown: |R[{index},{index}]| = {value:e} is below threshold")]
    SingularTriangular { index: usize, value: f64 },

    #[error("column {got} processed out of order (expected column {expected})")]
    ColumnOutOfOrder { expected: usize, got: usize },

    #[error("Krylov basis is full ({capacity} vectors)")]
    BasisFull { capacity: usize },

    #[error("diagonal block {block} (rows {start}..{end}) is numerically singular")]
    SingularBlock {
        block: usize,
        start: usize,
        end: usize,
    },

    #[error("invalid preconditioner: {0}")]
    InvalidPreconditioner(String),

    #[error("eigenvalue iteration for polynomial roots did not converge")]
    EigenFailure,
}
