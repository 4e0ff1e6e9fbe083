//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by lattice construction, solvers and file handling.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain (dimension, size,
    /// level index, distribution bounds, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two artifacts that must describe the same lattice do not.
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    /// A requested operator block has an empty row or column set.
    #[error("empty operator block: {0}")]
    EmptyOperator(String),

    /// Input data violates a consistency requirement (containment of
    /// kernels, Cauchy data compatibility, ...).
    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    /// A numerical routine failed outright (factorization or SVD breakdown).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A file does not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
