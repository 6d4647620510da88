use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the supported range {min}..={max}")]
    SizeLimit {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("moment of order {order} needs cumulants up to order {order}, only {available} given")]
    Arity { order: usize, available: usize },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error(
        "{ensemble} violates the marginal fourth-moment hypothesis: \
         n²·max E|<f,x>|⁴ is {l4_small:.1} at n = {n_small} and {l4_large:.1} at n = {n_large}"
    )]
    HypothesisViolated {
        ensemble: String,
        n_small: usize,
        l4_small: f64,
        n_large: usize,
        l4_large: f64,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by the request itself rather than by a run.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::SizeLimit { .. }
                | Error::Arity { .. }
                | Error::Validation(_)
                | Error::Unsupported(_)
                | Error::Precondition(_)
                | Error::HypothesisViolated { .. }
        )
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
