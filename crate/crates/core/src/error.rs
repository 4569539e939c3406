use thiserror::Error;

/// Errors raised by the numerical kernels and the model catalog.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },

    #[error("non-finite function value {value} at {at}")]
    Evaluation { at: f64, value: f64 },

    #[error("invalid model parameters: {0}")]
    Construction(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("boundary classification failed: {0}")]
    Classification(String),

    #[error("horizon exceeded: clock target t = {t} not reached within horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("finiteness of E I^{s} is not established: {reason}")]
    FinitenessUnknown { s: f64, reason: String },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
