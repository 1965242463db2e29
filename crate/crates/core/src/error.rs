use thiserror::Error;

/// Errors produced by the analytic evaluators, samplers and Monte Carlo engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function or type.
    #[error("domain error: {0}")]
    Domain(String),

    /// The mesoscopic kernel diverges at zero frequency offset.
    #[error("g(x) diverges at x = {0}; use a strictly positive offset")]
    Divergence(f64),

    /// Parameters make a normalizing denominator vanish.
    #[error("singular parameters: {0}")]
    SingularParameter(String),

    /// No canonical photon-count law exists for this state.
    #[error("counting statistics are not defined for {0} states")]
    UnsupportedSampling(&'static str),

    /// The field covariance is not positive semi-definite on the requested grid.
    #[error("covariance model inconsistent on grid: smallest eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    CovarianceModel { min_eigenvalue: f64, tolerance: f64 },

    /// Not enough data for a stable estimate.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Malformed textual input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
