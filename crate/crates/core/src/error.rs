use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("integrand not integrable: {0}")]
    NonIntegrable(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("thinning envelope violated: {0}")]
    Envelope(String),
    #[error("knob {0} is not supported for this model")]
    UnsupportedKnob(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}
