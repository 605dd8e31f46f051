//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while parsing, building or optimizing a model.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed input record. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The molecular model violates a structural invariant (duplicate atom,
    /// missing backbone atom, missing chain, ...).
    #[error("structural error: {0}")]
    Structure(String),

    /// An atom address does not resolve.
    #[error("lookup failed: {0}")]
    Lookup(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A function was evaluated outside its domain (r <= 0, w = 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value cannot be represented in the requested output format.
    #[error("format error: {0}")]
    Format(String),

    /// An objective could not be evaluated (e.g. coincident atoms).
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// The objective returned a non-finite value or gradient during a run.
    #[error("optimizer diverged at iteration {iteration}: {reason}")]
    Divergence {
        iteration: usize,
        reason: String,
        /// Last iterate with a finite objective value.
        last_good: Vec<f64>,
        last_good_f: f64,
    },

    #[error("network error: {0} (use --template PATH to work offline)")]
    Network(String),

    #[error("remote returned status {status} for {url}")]
    NotFound { status: u16, url: String },

    #[error("corrupt download: {0}")]
    CorruptDownload(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
