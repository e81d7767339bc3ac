use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("element of order q={have} cannot support an order-{need} operation")]
    OrderTooLow { have: usize, need: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input leaves the validity ball: {norm:.6e} >= {radius:.6e}")]
    OutsideValidity { norm: f64, radius: f64 },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("linear map is not invertible (smallest singular value {sigma_min:.3e})")]
    NotInvertible { sigma_min: f64 },

    #[error("resonant at degree {degree}: multi-indices {indices:?}")]
    Resonant { degree: usize, indices: Vec<String> },

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("malformed record: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
