use thiserror::Error;

/// Errors raised by the simulation and planning primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KljnError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("sample count must be at least 1")]
    ZeroSamples,

    #[error("sample stream is empty")]
    EmptyStream,

    #[error("sample streams differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("key length must be at least 1 bit")]
    ZeroKeyLength,

    #[error("invalid link configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid attack parameters: {0}")]
    InvalidAttack(String),

    #[error("invalid detection parameters: {0}")]
    InvalidDetection(String),

    #[error("unknown station `{0}`")]
    UnknownStation(String),
}

pub type Result<T, E = KljnError> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(KljnError::NonPositive { name, value })
    }
}
