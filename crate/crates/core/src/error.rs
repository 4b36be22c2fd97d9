use thiserror::Error;

/// Errors raised by the solvers and the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("conjugate gradients broke down at iteration {iteration} (curvature {curvature:e})")]
    CgBreakdown { iteration: usize, curvature: f64 },

    #[error("conjugate gradients did not converge for columns {columns:?} (iterations {iterations:?})")]
    CgNotConverged {
        columns: Vec<usize>,
        iterations: Vec<usize>,
    },

    #[error("nonpositive diagonal entry {value:e} at variable {index}")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("line search stagnated after {trials} trials")]
    Stagnation { trials: usize },

    #[error("missing rows of W: {0:?}")]
    MissingRows(Vec<usize>),

    #[error("singular block: {0}")]
    SingularBlock(String),

    #[error("relaxation increased the objective from {before} to {after} on level {level}")]
    ContractViolation { level: usize, before: f64, after: f64 },

    #[error("zero variance in row {0}")]
    ZeroVariance(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
