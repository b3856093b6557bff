use thiserror::Error;

/// Errors produced by the wavefront toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// The characteristic functions are only analytic for `z > ln b / (c tau)`.
    #[error("z = {z} lies outside the analyticity strip z > {pole}")]
    Domain { z: f64, pole: f64 },

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Curve value grows without bound (e.g. c# just above the threshold delay).
    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("grid is not aligned with the delay: dt * m = {dt_m}, c * tau = {ctau}")]
    Misaligned { dt_m: f64, ctau: f64 },

    #[error("profiles are not ordered: {0}")]
    Order(String),

    #[error("parameters outside the existence domain or critical: {0}")]
    OutsideDomain(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("convexity check failed: {0}")]
    Convexity(String),

    #[error("evolution setup: {0}")]
    Evolve(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
