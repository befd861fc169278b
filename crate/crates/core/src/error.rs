use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("buffer length {found} does not match {width}x{height}")]
    BufferLength {
        width: usize,
        height: usize,
        found: usize,
    },
    #[error("invalid map value at pixel ({u}, {v}): {reason}")]
    InvalidValue { u: usize, v: usize, reason: &'static str },
    #[error("non-positive depth at pixel ({u}, {v})")]
    NonPositiveDepth { u: usize, v: usize },
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("mask has no set pixels")]
    EmptyMask,
    #[error("invalid dilation set: {0}")]
    InvalidDilations(String),
    #[error("pair set is empty")]
    EmptyPairSet,
    #[error("pair endpoint {pixel} is not a valid pixel of the map")]
    InvalidEndpoint { pixel: usize },
    #[error("degenerate scale: {0}")]
    DegenerateScale(String),
    #[error("need at least 2 points, found {0}")]
    TooFewPoints(usize),
    #[error("ground truth is degenerate (TSS = {0:e})")]
    DegenerateGt(f64),
    #[error("point set is empty")]
    EmptySet,
    #[error("material vector must have {expected} components, found {found}")]
    MaterialLayout { expected: usize, found: usize },
    #[error("generation failed after {retries} retries: {reason}")]
    GenerationFailed { retries: usize, reason: String },
    #[error("invalid mesh resolution: {0}")]
    InvalidResolution(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scene has no geometry")]
    EmptyScene,
    #[error("ray direction has zero length")]
    DegenerateRay,
    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("truncated payload in {path}: expected {expected} bytes, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("missing prediction: {0}")]
    MissingPrediction(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest error in {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
