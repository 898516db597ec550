use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", path.display())]
    MissingFile { path: PathBuf },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: cannot decode PNG: {source}", path.display())]
    PngDecode {
        path: PathBuf,
        #[source]
        source: png::DecodingError,
    },

    #[error("{}: cannot encode PNG: {source}", path.display())]
    PngEncode {
        path: PathBuf,
        #[source]
        source: png::EncodingError,
    },

    #[error("{}: unsupported bit depth {depth}, expected {expected}", path.display())]
    UnsupportedBitDepth { path: PathBuf, depth: u8, expected: &'static str },

    #[error("{}: expected a {expected} PNG, found {found}", path.display())]
    ChannelLayout { path: PathBuf, expected: &'static str, found: String },

    #[error("{}: not a DFD1 raw map: {reason}", path.display())]
    RawFormat { path: PathBuf, reason: String },

    #[error("value {value} at pixel {index} falls outside [0, 65535] after scaling by {scale}")]
    Png16Range { index: usize, value: f64, scale: f64 },

    #[error("scale {0} must be finite and > 0")]
    InvalidScale(f64),

    #[error("{}: line {line}: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("split file {} contains no ids", path.display())]
    EmptySplit { path: PathBuf },

    #[error("split file {}: duplicate id {id:?} on line {line}", path.display())]
    DuplicateId { path: PathBuf, id: String, line: usize },

    #[error("sample {id}: {source}")]
    Sample { id: String, source: Box<Error> },

    #[error(transparent)]
    Core(#[from] dfd_core::Error),

    #[error("JSON encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile { path }
        } else {
            Error::Io { path, source }
        }
    }

    /// True for failures reading or writing files, as opposed to bad values.
    pub fn is_io(&self) -> bool {
        match self {
            Error::MissingFile { .. }
            | Error::Io { .. }
            | Error::PngDecode { .. }
            | Error::PngEncode { .. }
            | Error::UnsupportedBitDepth { .. }
            | Error::ChannelLayout { .. }
            | Error::RawFormat { .. } => true,
            Error::Sample { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
