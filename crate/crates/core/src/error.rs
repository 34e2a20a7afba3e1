use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate interval [{a}, {b}]: parent mass {mass:e} below 1e-12")]
    DegenerateInterval { a: f64, b: f64, mass: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}] within {max_intervals} intervals")]
    QuadratureDidNotConverge { lo: f64, hi: f64, max_intervals: usize },

    #[error("code {0} is not active under the source support")]
    InactiveCode(i64),

    #[error("mass identity violated at code {code}: |error| = {error:e}")]
    MassIdentity { code: i64, error: f64 },

    #[error("frontier is not monotone at lambda = {0}")]
    NonMonotone(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed user input rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Config(_))
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
