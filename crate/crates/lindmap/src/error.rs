use thiserror::Error;

/// Errors surfaced by construction and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} out of range for lattice of {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("eigenvalue {value:.3e} below PSD tolerance {tol:.1e}")]
    NotPositiveSemiDefinite { value: f64, tol: f64 },

    #[error("matrix is singular within tolerance; inverse power undefined")]
    Singular,

    #[error("superoperator dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("operator basis does not span the jump algebra (residual {residual:.3e})")]
    BasisSpan { residual: f64 },

    #[error("coefficient matrix does not commute with its conjugate (residual {residual:.3e})")]
    NonCommutingCoefficients { residual: f64 },

    #[error("generator is not detailed-balanced here: {0}")]
    NotDetailedBalanced(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical invariant violated: {0}")]
    InvariantViolated(String),

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
