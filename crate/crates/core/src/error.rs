use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy target not met: {what} (partial value {partial:e})")]
    Accuracy { what: String, partial: f64 },

    #[error("root bracket failure for J_{nu}, zero #{k}: bracket [{lo}, {hi}]")]
    Bracket { nu: f64, k: usize, lo: f64, hi: f64 },

    #[error("pole of zeta at s = {0}")]
    Pole(f64),

    #[error("conformal corner model breaks down at alpha = pi (alpha = {0})")]
    ModelBreakdown(f64),

    #[error("finite-part fit residual {residual:e} exceeds threshold {threshold:e} (value {value:e})")]
    Regularization {
        value: f64,
        residual: f64,
        threshold: f64,
    },

    #[error("no c12 entry for curved corner with alpha = {0}")]
    IncompleteTable(f64),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("ill-conditioned least-squares problem (condition estimate {0:e})")]
    Conditioning(f64),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
