use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gauge mismatch: {left} vs {right} (regauge explicitly first)")]
    GaugeMismatch { left: String, right: String },

    #[error("degree error: {0}")]
    Degree(String),

    #[error("point outside the chart: {0}")]
    Domain(String),

    #[error("singular or indefinite metric: {0}")]
    SingularMetric(String),

    #[error("decay probe `{probe}` failed: measured slope {measured:.3} exceeds declared {declared:.3} + tolerance")]
    DecayProbe {
        probe: String,
        measured: f64,
        declared: f64,
    },

    #[error("conformal factor is not in the adapted class: {0}")]
    NotAdapted(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that come from bad input rather than from a failed check.
    pub fn is_config_or_domain(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Domain(_)
                | Error::DimensionMismatch { .. }
                | Error::Degree(_)
                | Error::SingularMetric(_)
                | Error::DecayProbe { .. }
                | Error::NotAdapted(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
