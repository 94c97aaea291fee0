use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation (zero polynomial,
    /// division by the zero function, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Iterative numerics failed to converge; carries the best iterate found.
    #[error("numeric error: {message} (best iterate: {best:?})")]
    Numeric {
        message: String,
        best: Vec<Complex64>,
    },

    /// Attempted to evaluate a rational function at (or numerically at) a pole.
    #[error("pole evaluation at s = {s}")]
    PoleEvaluation { s: Complex64 },

    /// A physical or configuration parameter is out of range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The loop equations are algebraically degenerate (e.g. 1 - K21 G22 == 0).
    #[error("algebraic degeneracy: {0}")]
    Degeneracy(String),

    #[error("range error: {0}")]
    Range(String),

    /// |G11| vanished where the added noise is referred to the input.
    #[error("degenerate gain at omega = {omega}")]
    DegenerateGain { omega: f64 },

    /// A check ran to completion and failed (unstable loop, violated constraint).
    #[error("{0}")]
    CheckFailed(String),

    #[error("experiment error: {0}")]
    Experiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numeric(message: impl Into<String>, best: Vec<Complex64>) -> Self {
        Error::Numeric {
            message: message.into(),
            best,
        }
    }

    /// True when the error means "the frequency axis hits a pole".
    pub fn is_pole_evaluation(&self) -> bool {
        matches!(self, Error::PoleEvaluation { .. })
    }
}
