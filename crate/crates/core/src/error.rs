use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace must be 1, got {0}")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("POVM effect has eigenvalue {0} outside [0, 1]")]
    BadEffect(f64),

    #[error("purity {purity} outside the physical range [{floor}, 1]")]
    PurityOutOfRange { purity: f64, floor: f64 },

    #[error("depolarizing weight {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("best state is not unique (top-two purity margin {0:e})")]
    TiedBest(f64),

    #[error("need at least 2 states, got {0}")]
    TooFewStates(usize),

    #[error("copies per basis must be at least 2, got {0}")]
    CopiesPerBasis(usize),

    #[error("outcome {outcome} outside 0..{dim}")]
    OutcomeOutOfRange { outcome: usize, dim: usize },

    #[error("invalid probability vector: {0}")]
    BadDistribution(String),

    #[error("budget {budget} is too small: {reason}")]
    InsufficientBudget { budget: u64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed ensemble file: {0}")]
    EnsembleFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
