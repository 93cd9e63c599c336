use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("Taylor expansion point must be strictly positive, got ({0}, {1})")]
    NonPositiveLocalPoint(f64, f64),

    #[error("SINR values must be non-negative, got {0}")]
    NegativeSinr(f64),

    #[error("malformed constraint handle: {0}")]
    MalformedHandle(String),

    #[error("conic problem is invalid: {}", .0.join("; "))]
    InvalidProblem(Vec<String>),

    #[error("subproblem solve failed: {0}")]
    Solver(String),

    #[error("no randomization candidate satisfied the feasibility check")]
    NoFeasibleCandidate,

    #[error("relay SINR threshold could not be restored after {attempts} halvings")]
    RestorationExhausted { attempts: usize },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
