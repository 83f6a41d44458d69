//! Crate-wide error type.

use std::io;
use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: unsupported or malformed image ({detail})")]
    Format { path: PathBuf, detail: String },

    #[error("image too small: {0}")]
    Dimension(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("the three points are collinear or coincident")]
    CollinearPoints,

    #[error("radius {0} rounds below one pixel")]
    DegenerateRadius(f64),

    #[error("circle has no in-bounds test points")]
    ZeroSupport,

    #[error("no circle candidates survived filtering")]
    NoCandidates,

    #[error("action set is empty")]
    EmptyActionSet,

    #[error("action index {index} out of range for {len} actions")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scene spec line {line}: {detail}")]
    SceneSpec { line: usize, detail: String },
}
