use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Configuration-type problems (bad exponents, malformed grids, invalid
/// weights) are separated from numerical failures so front ends can map
/// them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exponent relation violated: {0}")]
    ExponentRelation(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("empty intersection: cube does not meet the domain box")]
    EmptyIntersection,

    #[error("empty family: {0}")]
    EmptyFamily(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("cube {cube} is not admissible: {reason}")]
    Inadmissible { cube: String, reason: String },

    #[error("bisection did not converge after {iterations} iterations (bracket [{lo:e}, {hi:e}])")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by invalid input rather than by a numerical
    /// breakdown.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::NoConvergence { .. } | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
