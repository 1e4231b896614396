use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("numeric failure: {message} (best residual {best_residual:e})")]
    NumericFailure { message: String, best_residual: f64 },

    #[error("bracket [{lo}, {hi}] does not enclose a sign change")]
    Bracket { lo: f64, hi: f64 },

    #[error("input lies on the pole set of the map")]
    Pole,

    #[error("insufficient data{}: {reason}", level.map(|l| format!(" at level {l}")).unwrap_or_default())]
    InsufficientData { level: Option<usize>, reason: String },

    #[error("missing data: {0}")]
    MissingData(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical method rather than of its inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NumericFailure { .. } | Error::Bracket { .. } | Error::Pole
        )
    }
}
