use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A state derivative or state became NaN/inf during integration.
    #[error("integration blew up at t = {t} s ({what})")]
    NonFinite { t: f64, what: String },

    /// The gain does not make `A - B K - 0.5 gamma I` Hurwitz.
    #[error("gain is not stabilizing: max real part of closed-loop spectrum is {max_real}")]
    NotStabilizing {
        max_real: f64,
        spectrum: Vec<(f64, f64)>,
    },

    #[error("Lyapunov operator is singular (matrix not Hurwitz)")]
    SingularLyapunov,

    #[error(
        "interval excitation not reached: integral of delta^2 is {achieved}, need {threshold}"
    )]
    IeNotSatisfied { achieved: f64, threshold: f64 },

    #[error("no excitation: s0 stayed at 1, finite-time reconstruction is impossible")]
    NoExcitation,

    #[error("sigma must lie in (0, 1), got {0}")]
    InvalidSigma(f64),

    #[error("gradient flow step collapsed below {step} at t = {t}")]
    StepFailure { t: f64, step: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
