use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent vector/matrix shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Input outside an operation's domain (index range, size caps, non-optimal solutions).
    #[error("rejected input: {0}")]
    InvalidInput(String),

    /// Model values violating instance or config invariants.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("simplex exceeded {iterations} pivots: {dump}")]
    SolverFailure { iterations: usize, dump: String },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("instance generation failed after {attempts} attempts (last warnings: {})", .warnings.join("; "))]
    GenerationFailure {
        attempts: usize,
        warnings: Vec<String>,
    },

    #[error("episode failed at step {step} under policy {policy}: {source}")]
    Episode {
        step: usize,
        policy: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI, grouped by failure category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension(_) | Error::InvalidInput(_) | Error::Validation(_) => 2,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 3,
            Error::SolverFailure { .. } => 4,
            Error::GenerationFailure { .. } => 5,
            Error::ContractViolation(_) => 6,
            Error::Episode { source, .. } => source.exit_code(),
        }
    }
}
