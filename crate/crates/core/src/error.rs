use thiserror::Error;

/// Errors raised by model construction, estimation, forecasting and risk code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MvarError {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time index {t} out of range (valid: {lo}..={hi})")]
    IndexOutOfRange { t: usize, lo: usize, hi: usize },

    #[error("series too short: need at least {needed} observations, have {have}")]
    SeriesTooShort { needed: usize, have: usize },

    #[error("non-finite value in series at row {row}, column {col}")]
    NonFiniteData { row: usize, col: usize },

    #[error("covariance matrix of component {component} is not symmetric positive definite")]
    NotPositiveDefinite { component: usize },

    #[error("every component density underflows at time index {t}")]
    Underflow { t: usize },

    #[error("weighted regression for component {component} is singular")]
    SingularRegression { component: usize },

    #[error("component {component} collapsed (smallest covariance eigenvalue {min_eigenvalue:e})")]
    ComponentCollapse { component: usize, min_eigenvalue: f64 },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("non-finite log-likelihood: parameters are degenerate")]
    NonFiniteLikelihood,

    #[error("matrix is singular or not positive definite")]
    SingularCovariance,

    #[error("degenerate frontier: mean vector proportional to ones (D = {d:e})")]
    DegenerateFrontier { d: f64 },

    #[error("projected variance {variance:e} of component {component} is not positive")]
    NonPositiveVariance { component: usize, variance: f64 },

    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),

    #[error("failed to bracket quantile {0}")]
    QuantileBracket(f64),

    #[error("all {0} EM starts failed")]
    AllStartsFailed(usize),

    #[error("{0}")]
    Data(String),

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, MvarError>;

impl From<std::io::Error> for MvarError {
    fn from(e: std::io::Error) -> Self {
        MvarError::Io(e.to_string())
    }
}

impl From<csv::Error> for MvarError {
    fn from(e: csv::Error) -> Self {
        MvarError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for MvarError {
    fn from(e: serde_json::Error) -> Self {
        MvarError::Data(e.to_string())
    }
}
