//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Diffusion time too close to an endpoint where the bridge terms are
    /// singular.
    #[error("t = {t} inside the endpoint guard band; require {lo} <= t <= {hi}")]
    EndpointGuard { t: f64, lo: f64, hi: f64 },

    /// Tensor shapes disagree with the operation's contract.
    #[error("{what}: expected shape {expected:?}, got {got:?}")]
    ShapeMismatch {
        what: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    /// Cholesky factorization failed even after jitter escalation.
    #[error("covariance not positive definite after jitter escalation up to {last_jitter}")]
    Cholesky { last_jitter: f64 },

    /// Invalid configuration value or unknown key.
    #[error("config: {0}")]
    Config(String),

    /// Malformed or unusable input data.
    #[error("data: {0}")]
    Data(String),

    /// A computation produced a non-finite or otherwise unusable value.
    #[error("numeric: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    ///
    /// 2 = usage/config, 3 = data, 4 = numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::Io(_) | Error::ShapeMismatch { .. } => 3,
            Error::Domain { .. }
            | Error::EndpointGuard { .. }
            | Error::Cholesky { .. }
            | Error::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
