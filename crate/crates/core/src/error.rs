use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("degenerate polytope: generators are linearly dependent")]
    Degenerate,

    #[error("simplex did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("coefficients do not reproduce the point (residual {residual:e})")]
    InvalidRepresentation { residual: f64 },

    #[error("matrix is not in the class M(m,n): {0}")]
    NotInClass(String),

    #[error("problem too large for exhaustive evaluation: {0}")]
    TooLarge(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("no feasible parameters; binding constraint: {0}")]
    Infeasible(String),
}
