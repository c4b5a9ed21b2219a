use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by loaders, validators and the numeric kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: shape mismatch at record {record}: expected {expected} values, found {actual}")]
    ShapeMismatch {
        path: PathBuf,
        record: usize,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: label count mismatch: {labels} labels for {records} records")]
    LabelCountMismatch {
        path: PathBuf,
        labels: usize,
        records: usize,
    },

    #[error("{path}: truncated file: expected {expected} bytes, found {actual}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("distance matrix is not symmetric at ({i},{j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("exact cover enumeration is limited to n <= {limit}, got n = {n}")]
    ExactTooLarge { n: usize, limit: usize },

    #[error("k-medoids schedule is empty")]
    EmptySchedule,

    #[error("sample contains a single class; inter-class distance is undefined")]
    SingleClass,

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("non-finite value encountered: {context}")]
    NonFinite { context: String },

    #[error("descent did not converge on draw {draw}: gradient norm {grad_norm:.3e} after {iters} iterations")]
    NoConvergence {
        draw: usize,
        grad_norm: f64,
        iters: usize,
    },

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
