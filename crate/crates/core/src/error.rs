use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReffError {
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("state norm {0} deviates from 1")]
    NotNormalized(f64),
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("{what} needs {n} qubits, cap is {cap}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },
    #[error("parameter vector has length {found}, expected {expected}")]
    ParamLength { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dataset has no product factors")]
    MissingFactors,
    #[error("unsupported format version {0}")]
    FormatVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ReffError>;

pub(crate) fn invalid(msg: impl Into<String>) -> ReffError {
    ReffError::InvalidArgument(msg.into())
}
