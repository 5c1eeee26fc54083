use crate::gpe::WaveFunction;
use thiserror::Error;

/// Crate-wide error type. Validation messages name the violated constraint.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The integrator produced a non-finite value. Carries the last finite
    /// state so callers can dump a checkpoint for diagnosis.
    #[error("numerical abort: non-finite field detected at step {step}, t = {t}")]
    NonFinite {
        step: u64,
        t: f64,
        state: Box<WaveFunction>,
    },

    #[error("statistics: {0}")]
    Stats(String),

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
