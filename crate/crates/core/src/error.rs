use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic bytes {0:?}, expected \"CSPL\"")]
    BadMagic([u8; 4]),

    #[error("unsupported plane file version {0}")]
    UnsupportedVersion(u8),

    #[error("unknown dtype tag {0}")]
    UnknownDtype(u8),

    #[error("malformed plane header: {0}")]
    BadHeader(&'static str),

    #[error("truncated plane file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("plane file has {0} trailing bytes after the payload")]
    TrailingBytes(usize),

    #[error("plane dimensions {n_planes}x{height}x{width} overflow the address space")]
    DimOverflow { n_planes: u32, height: u32, width: u32 },

    #[error("non-finite value at element {index}")]
    NonFinite { index: usize },

    #[error("value {value} at element {index} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("negative cluster label {label} at element {index}")]
    NegativeLabel { index: usize, label: i32 },

    #[error("expected a {expected} plane file, found {found}")]
    WrongDtype { expected: &'static str, found: &'static str },

    #[error("expected {expected} plane(s), found {found}")]
    WrongPlaneCount { expected: usize, found: usize },

    #[error("plane data has {len} elements, {height}x{width} requires {}", height * width)]
    LengthMismatch { height: usize, width: usize, len: usize },

    #[error("planes must have non-zero dimensions, got {height}x{width}")]
    EmptyPlane { height: usize, width: usize },

    #[error("dimension mismatch in {context}: {left:?} vs {right:?}")]
    DimMismatch { context: String, left: (usize, usize), right: (usize, usize) },

    #[error("attention stack needs at least one head")]
    NoHeads,

    #[error("PNG must be 8-bit grayscale, found {0}")]
    WrongColorType(String),

    #[error("PNG decode failed: {0}")]
    PngDecode(#[from] png::DecodingError),

    #[error("PNG encode failed: {0}")]
    PngEncode(#[from] png::EncodingError),

    #[error("image `{image_id}` is missing its sidecar {}", path.display())]
    MissingSidecar { image_id: String, path: PathBuf },

    #[error("no images with sidecars in group directory {}", .0.display())]
    EmptyGroup(PathBuf),

    #[error("no group directories under {}", .0.display())]
    NoGroups(PathBuf),

    #[error("batch is empty")]
    EmptyBatch,

    #[error("batch lengths differ: {left} vs {right}")]
    BatchLengthMismatch { left: usize, right: usize },

    #[error("confidence score {value} at index {index} is negative or non-finite")]
    NegativeScore { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("no prediction/ground-truth pairs to evaluate")]
    NothingToEvaluate,

    #[error("malformed score file: {0}")]
    MalformedScores(String),
}

impl Error {
    /// Adapter for `map_err` that attaches the offending path.
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn dims(context: impl Into<String>, left: (usize, usize), right: (usize, usize)) -> Error {
        Error::DimMismatch { context: context.into(), left, right }
    }
}
