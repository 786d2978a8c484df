use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input vectors are linearly dependent")]
    DependentInput,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("fixed vector is zero")]
    DegenerateFixedVector,
    #[error("residual of the fixed vector vanished")]
    DegenerateResidual,
    #[error("index {index} out of range for {len} vectors")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension {dim} exceeds the enumeration cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },
    #[error("search space of {points} points exceeds the cap {cap}")]
    SearchSpaceTooLarge { points: String, cap: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("basis does not have full rank")]
    Rank,
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
