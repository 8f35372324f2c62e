use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window order {0}: must be at least 1")]
    InvalidOrder(usize),

    #[error("record length {n} is too short for window order {h} (need at least {min})")]
    RecordTooShort { n: usize, h: usize, min: usize },

    #[error("length mismatch: signal has {signal} samples, window has {window}")]
    Shape { signal: usize, window: usize },

    #[error("spectrum contains no signal")]
    NoSignal,

    #[error("bin index {k} is outside the usable range 1..={max}")]
    BinOutOfRange { k: usize, max: usize },

    #[error("frequency estimation failed: {0}")]
    Estimation(String),

    #[error("degenerate interpolation system at lambda = {lambda}")]
    Degenerate { lambda: f64 },

    #[error("lambda = {lambda} puts a zero of D on the evaluation grid")]
    Singular { lambda: f64 },

    #[error("component at {freq} Hz violates Nyquist for fs = {fs} Hz")]
    Aliasing { freq: f64, fs: f64 },

    #[error("invalid signal description: {0}")]
    InvalidSignal(String),

    #[error("invalid filter template: {0}")]
    InvalidTemplate(String),

    #[error("filter design failed: {0}")]
    DesignFailure(String),

    #[error("record of {len} samples is shorter than the {taps} filter taps")]
    InsufficientData { len: usize, taps: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("corrupt file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
