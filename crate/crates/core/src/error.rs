use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate geometry: window {window} m is smaller than 4r = {min} m")]
    DegenerateGeometry { window: f64, min: f64 },

    #[error("path-loss exponent {0} <= 2: interference integral diverges")]
    DivergentIntegral(f64),

    #[error("tail exponent {0} <= 1: semi-infinite integral diverges")]
    DivergentTail(f64),

    #[error("root not bracketed: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    BracketViolation { f_lo: f64, f_hi: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error {error} after {intervals} intervals")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("characteristic function is not normalised: value at 0 is {0}")]
    NotNormalised(String),

    #[error("declared conjugate symmetry violated at omega = {0}")]
    SymmetryViolation(f64),

    #[error("link index {index} out of range for {len} links")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no deliveries recorded on the included links")]
    EmptyStatistics,

    #[error("unstable regime: service rate {service} <= arrival rate {arrival}")]
    Unstable { service: f64, arrival: f64 },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
