use thiserror::Error;

/// Errors raised by the consensus toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("invalid matrix data: {0}")]
    InvalidData(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("matrix is not diagonalizable (eigenvector condition number {condition:.3e})")]
    NotDiagonalizable { condition: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("invalid coupling matrix: {0}")]
    InvalidCoupling(String),

    #[error("invalid edge list: {0}")]
    InvalidEdgeList(String),

    #[error("at least two agents are required, got {0}")]
    TooFewAgents(usize),

    #[error("reduced coupling matrix is not Hurwitz (max real part {max_real:.6e})")]
    NotHurwitz { max_real: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("observer design failed: {0}")]
    DesignFailed(String),

    #[error("not enough usable samples: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
