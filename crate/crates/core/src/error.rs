use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unregistered problem: {0}")]
    UnregisteredProblem(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("front unavailable for {0}: no approximate-front file registered")]
    FrontUnavailable(String),

    #[error("ill-conditioned Gram matrix: factorization failed with jitter up to {jitter:e}")]
    IllConditioned { jitter: f64 },

    #[error("no evaluations")]
    NoEvaluations,

    #[error("training diverged at step {step}")]
    TrainingDiverged { step: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("incompatible checkpoint: {0}")]
    IncompatibleCheckpoint(String),

    #[error("unsupported dimension: hypervolume needs 2 or 3 objectives, got {0}")]
    UnsupportedDimension(usize),

    #[error("insufficient candidates: need {needed}, got {available}")]
    InsufficientCandidates { needed: usize, available: usize },

    #[error("invalid preference: {0}")]
    InvalidPreference(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed front file: {0}")]
    FrontFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
