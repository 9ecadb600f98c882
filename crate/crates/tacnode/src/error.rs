use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("index {index} outside [{lo}, {hi}]")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("rejection budget of {0} attempts exhausted; acceptance probability too low")]
    BudgetExhausted(u64),
    #[error("coupling constraint violated at level {0}")]
    Constraint(usize),
    #[error("interlacing violated: {0}")]
    Interlacing(String),
    #[error("no accepted samples")]
    NoSamples,
    #[error("region has {cells} cells, enumeration limit is {limit}")]
    EnumerationGuard { cells: usize, limit: usize },
    #[error("region admits no domino tiling")]
    NotTileable,
    #[error("negative cone volume {0:e}")]
    NegativeVolume(f64),
    #[error("dot rule calibration failed")]
    Calibration,
    #[error("cost guard: {0}")]
    CostGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
