use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: timestamp {t} precedes previous timestamp {prev}")]
    NonMonotoneTimestamp { line: usize, prev: f64, t: f64 },

    #[error("input contains no samples")]
    EmptyInput,

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(f64),

    #[error("invalid phase markers: {0}")]
    InvalidMarkers(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate sample: zero variance")]
    Degenerate,

    #[error("all {trials} bootstrap trials were degenerate")]
    AllTrialsDegenerate { trials: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("perfect fit: residual variance is zero")]
    PerfectFit,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training error became non-finite at epoch {epoch}")]
    NonFiniteTraining { epoch: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the data itself rather than by how it was supplied.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::Degenerate
                | Error::AllTrialsDegenerate { .. }
                | Error::PerfectFit
                | Error::RankDeficient { .. }
                | Error::NonFiniteTraining { .. }
                | Error::InsufficientData { .. }
        )
    }
}
