use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported dimensionality: NAXIS = {0}, expected 3")]
    UnsupportedDimensionality(i64),

    #[error("unsupported BITPIX {0}: only -32 and -64 are accepted")]
    UnsupportedBitpix(i64),

    #[error("truncated data unit: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("malformed FITS header: {0}")]
    Header(String),

    #[error("size mismatch: dims {dims:?} need {expected} bytes, file has {found}")]
    SizeMismatch {
        dims: [usize; 3],
        expected: u64,
        found: u64,
    },

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    #[error("unsupported wavelet: {0}")]
    UnsupportedWavelet(String),

    #[error("axis {axis} has length {len}, need at least 2")]
    AxisTooShort { axis: usize, len: usize },

    #[error("empty filter taps")]
    EmptyTaps,

    #[error("target length {target} on axis {axis} is inconsistent with {coeffs} coefficients and {taps} taps")]
    InconsistentLength {
        axis: usize,
        target: usize,
        coeffs: usize,
        taps: usize,
    },

    #[error("dims mismatch: expected {expected:?}, found {found:?}")]
    DimsMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("statistics undefined: cube has no non-blank voxels")]
    AllBlank,

    #[error("centroid undefined: clump total intensity is zero")]
    ZeroIntensity,

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_level(self, level: usize) -> Self {
        Error::AtLevel {
            level,
            source: Box::new(self),
        }
    }
}
