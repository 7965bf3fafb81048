use thiserror::Error;

pub type Result<T, E = QestError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QestError {
    #[error("degenerate direction")]
    DegenerateDirection,

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sample too small for adaptive split (N = {n}, N0 = {n0}, d = {d})")]
    SampleTooSmall { n: u64, n0: u64, d: usize },

    #[error("shot count mismatch: expected {expected}, got {got}")]
    ShotMismatch { expected: u64, got: u64 },

    #[error("QFI singular at purity boundary (r = {0})")]
    PurityBoundary(f64),

    #[error("coordinate singularity at pole (theta = {0})")]
    PoleSingularity(f64),

    #[error("divergent Fisher information (outcome probability {0})")]
    DivergentFisher(f64),

    #[error("matrix singular or ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("degenerate risk at N = {0}: mean fidelity is 1")]
    DegenerateRisk(u64),

    #[error("fit needs at least 3 rows, got {0}")]
    TooFewRows(usize),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl QestError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        QestError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Whether the error stems from invalid user input rather than a
    /// failure during execution.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            QestError::Io(_)
                | QestError::DegenerateRisk(_)
                | QestError::IllConditioned(_)
                | QestError::DivergentFisher(_)
        )
    }
}

impl From<std::io::Error> for QestError {
    fn from(e: std::io::Error) -> Self {
        QestError::Io(e.to_string())
    }
}

impl From<csv::Error> for QestError {
    fn from(e: csv::Error) -> Self {
        QestError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for QestError {
    fn from(e: serde_json::Error) -> Self {
        QestError::Parse(e.to_string())
    }
}
