use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the kernels, Gronwall, solver, and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series truncation failed: {what} not certified to {tol:e} within {max_terms} terms")]
    Truncation {
        what: &'static str,
        tol: f64,
        max_terms: usize,
    },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("solution blew up at step {step}")]
    BlowUp { step: usize },

    #[error("iteration diverged: {0}")]
    Instability(String),

    #[error("run failed: {0}")]
    RunFailure(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
