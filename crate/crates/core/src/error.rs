use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid branch spec: {0}")]
    InvalidSpec(String),

    #[error("theta = {theta} is within {distance:e} of a pole")]
    Pole { theta: f64, distance: f64 },

    #[error("root search failed: {0}")]
    RootNotFound(String),

    #[error("degenerate optimal weight for branch type {branch}: {reason}")]
    Degenerate { branch: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("weight coverage mismatch: {0}")]
    Coverage(String),

    #[error("weight {value} on {location} is outside (0, 1)")]
    WeightRange { location: String, value: f64 },

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Pole { .. }
                | Error::RootNotFound(_)
                | Error::Degenerate { .. }
                | Error::NoConvergence(_)
        )
    }
}
