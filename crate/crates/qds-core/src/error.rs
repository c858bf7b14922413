use thiserror::Error;

/// Errors surfaced by every module in this crate.
#[derive(Debug, Error)]
pub enum QdsError {
    #[error("matrix is not Hermitian: residual {residual:e} exceeds tolerance {tol:e}")]
    NonHermitianInput { residual: f64, tol: f64 },

    #[error("matrix is not a density matrix: {0}")]
    NotDensity(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Schatten exponent must satisfy p >= 1 (got {0})")]
    BadExponent(f64),

    #[error("eigenvalue {0} outside the domain of the scalar function")]
    DomainError(f64),

    #[error("Choi matrix is not positive semidefinite: min eigenvalue {0:e}")]
    NotCompletelyPositive(f64),

    #[error("channel is not trace-preserving: residual {0:e}")]
    NotTracePreserving(f64),

    #[error("channel failed QDS certification: {0}")]
    NotQds(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("spectra are not in majorization order: first violated partial sum has slack {0:e}")]
    NotMajorized(f64),

    #[error("Birkhoff decomposition stalled: no perfect matching with residual mass {0:e}")]
    DecompositionStalled(f64),

    #[error("rank must satisfy 1 <= rank < dim (got {rank} for dim {dim})")]
    BadRank { rank: usize, dim: usize },

    #[error("unknown zoo example `{0}`")]
    UnknownExample(String),

    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QdsError>;
