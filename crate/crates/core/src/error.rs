use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("entry buffer has length {len}, expected {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{what} = {size} exceeds the limit of {limit}")]
    SizeLimit {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state {index} has norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("Gram matrix diagonal entry {index} is {value}, expected 1")]
    NonUnitDiagonal { index: usize, value: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("probability has imaginary residue {imag:e} (real part {real:e})")]
    ImaginaryResidue { real: f64, imag: f64 },

    #[error("conditional distribution undefined: bunching probability is {0:e}")]
    UndefinedConditional(f64),

    #[error("unitary completion failed: {0}")]
    CompletionFailure(String),

    #[error("outcome has {found} photons, instance has {expected}")]
    PhotonCountMismatch { expected: usize, found: usize },

    #[error("bound check failed: {0}")]
    BoundViolated(String),

    #[error("self-check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
