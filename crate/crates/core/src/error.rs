use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("entry ({row}, {col}) = {value:e} overflows the target precision")]
    Overflow { row: usize, col: usize, value: f64 },

    /// `pivot` is 1-based.
    #[error(
        "matrix is not positive definite at pivot {pivot}: condition number too large for the chosen higher precision"
    )]
    NotPositiveDefinite { pivot: usize },

    #[error("Jacobi iteration did not converge in {sweeps} sweeps (max normalized off-diagonal {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("column {0} is zero")]
    ZeroColumn(usize),

    #[error("division by zero scale at index {0}")]
    ZeroScale(usize),

    #[error("singular value {index} = {value:e} underflows the working precision")]
    TinySingularValue { index: usize, value: f64 },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
