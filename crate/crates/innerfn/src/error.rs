//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight `{name}` is not integrable near r = 1: {detail}")]
    NonIntegrableWeight { name: String, detail: String },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("cannot certify tolerance {tol:e} for {what}: {detail}")]
    CannotCertify {
        what: String,
        tol: f64,
        detail: String,
    },

    #[error("evaluation point too close to the unit circle: |z| = {modulus}")]
    TooCloseToBoundary { modulus: f64 },

    #[error("Frostman parameter lies in the exceptional set of {function}")]
    ExceptionalParameter { function: String },

    #[error("cell {cell} inconclusive: winding estimate {estimate} is not near an integer")]
    CellInconclusive { cell: String, estimate: f64 },

    #[error("Newton refinement did not converge in cell {cell}")]
    NewtonNonConvergence { cell: String },

    #[error("zero list incomplete: certified up to |z| < {certified}, needed {needed}")]
    IncompleteZeroList { certified: f64, needed: f64 },

    #[error("missing disc average for annulus {n}")]
    MissingDiscAverage { n: usize },

    #[error("circle mean did not converge; last two values {previous} and {current}")]
    CircleMeanNonConvergence { previous: f64, current: f64 },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: String, detail: String },

    #[error("config error at {path}: {detail}")]
    Config { path: String, detail: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn invalid(name: &str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            detail: detail.into(),
        }
    }

    pub fn config(path: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            detail: detail.into(),
        }
    }
}
