use thiserror::Error;

/// Everything that can go wrong while evaluating or verifying.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("dimension {0} is outside the supported range 1..=6")]
    UnsupportedDimension(usize),

    #[error("tau is not symmetric: |tau[{row}][{col}] - tau[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("imaginary part of tau is not positive definite")]
    NotPositiveDefinite,

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("epsilon {0:e} is outside the supported range [1e-13, 0.5]")]
    EpsilonOutOfRange(f64),

    #[error("derivative order {0} is outside the supported range 0..=4")]
    DerivativeOrder(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix size {0} exceeds the supported maximum of 8")]
    MatrixTooLarge(usize),

    #[error("matrix does not satisfy the symplectic relations")]
    NotSymplectic,

    #[error("matrix is not in the theta group (diagonals of a^t c and b^t d must be even)")]
    NotInThetaGroup,

    #[error("c tau + d is numerically singular (condition number {0:e})")]
    SingularTransform(f64),

    #[error("Newton iteration did not converge from any of {starts} starts")]
    NoConvergence { starts: usize },

    #[error("converged to a singular point of the divisor (gradient norm {0:e})")]
    SingularPoint(f64),

    #[error("could not project back onto the divisor")]
    ProjectionFailed,

    #[error("sample rejected: {0}")]
    SampleRejected(String),

    #[error("no usable chart: both first partials are below threshold")]
    ChartFailure,

    #[error("tau is decomposable (an even theta constant vanishes)")]
    Decomposable,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, ThetaError>;
