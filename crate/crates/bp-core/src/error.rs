use thiserror::Error;

/// Errors surfaced by geometry, quadrature, transform and pipeline operations.
#[derive(Debug, Error)]
pub enum BpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension n = {0}; this tool requires n >= 3")]
    UnsupportedDimension(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("integrand is singular at quadrature node {index} ({coords:?})")]
    SingularIntegrand { index: usize, coords: Vec<f64> },

    #[error("division by zero in density `{0}`")]
    ZeroDenominator(String),

    #[error("degenerate scenario: {0}")]
    Degenerate(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("continuity requirement violated: {0}")]
    Continuity(String),

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<BpError>,
    },
}

impl BpError {
    pub fn in_stage(self, stage: &'static str) -> Self {
        BpError::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, BpError>;
