use std::io;

use thiserror::Error;

/// Invalid simulation or scheme parameters.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("n_sites must be at least 3, got {0}")]
    TooFewSites(usize),
    #[error("n_steps must be at least 1")]
    NoSteps,
    #[error("{name} must lie in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("invalid scheme: {0}")]
    Scheme(String),
    #[error("pattern A has no renormalization scheme")]
    AbsorbingScheme,
    #[error("field of {sites}x{rows} is smaller than one {w}x{h} block")]
    FieldTooSmall {
        sites: usize,
        rows: usize,
        w: usize,
        h: usize,
    },
}

/// Errors raised by the dataset file layer.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic in {kind} file")]
    BadMagic { kind: &'static str },
    #[error("unsupported {kind} version {version}")]
    BadVersion { kind: &'static str, version: u8 },
    #[error("corrupt record at offset {offset}: {reason}")]
    Corrupt { offset: u64, reason: String },
    #[error("payload of {0} bytes does not fit in a u32 length")]
    PayloadTooLarge(usize),
    #[error(transparent)]
    Param(#[from] ParamError),
}

impl StoreError {
    pub(crate) fn corrupt(offset: u64, reason: impl Into<String>) -> Self {
        StoreError::Corrupt {
            offset,
            reason: reason.into(),
        }
    }
}

/// Errors from sweeps, score ingest and tabular I/O.
#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("score table: {0}")]
    Scores(String),
    #[error("thresholds: {0}")]
    Thresholds(String),
    #[error("table: {0}")]
    Table(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Param(#[from] ParamError),
}
