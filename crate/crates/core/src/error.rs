use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("unknown kernel `{0}` (expected `gaussian` or `epanechnikov`)")]
    UnknownKernel(String),

    #[error("higher-order kernels are built from a plain base kernel")]
    NotPlainKernel,

    #[error("tabulated kernels do not share a grid step ({left} vs {right})")]
    StepMismatch { left: f64, right: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid must be strictly ascending (violated at index {0})")]
    UnsortedGrid(usize),

    #[error("need at least {needed} usable points, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("metric must be positive inside the window (h = {h}, value = {value})")]
    NonPositiveMetric { h: f64, value: f64 },

    #[error("degenerate smoother: boosted hat diagonal at index {index} is {value}")]
    DegenerateSmoother { index: usize, value: f64 },

    #[error("every bandwidth produced flagged predictions on the test bed: {0:?}")]
    AllBandwidthsFlagged(Vec<f64>),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
