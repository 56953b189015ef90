use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the laboratory.
///
/// The CLI maps [`Error::Config`] to exit code 1 and everything else to 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite sample {value} at x = {point:?}, t = {time}")]
    Evaluation {
        point: Vec<f64>,
        time: f64,
        value: f64,
    },

    #[error("linear solver did not converge at step {step}: relative residual {residual:e} after {iterations} iterations")]
    Solver {
        step: usize,
        residual: f64,
        iterations: usize,
    },

    #[error("range error: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("estimation did not converge after {iterations} iterations (last value {last:e})")]
    Estimation { iterations: usize, last: f64 },

    #[error("bump with eps = {eps} is under-resolved: {detail}")]
    Resolution { eps: f64, detail: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("empty sweep")]
    EmptySweep,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
