use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why an image byte stream could not be decoded or encoded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("unsupported image format: {0}")]
    Unsupported(String),
    #[error("truncated image stream")]
    Truncated,
    #[error("image dimensions {width}x{height} overflow the sample limit")]
    DimensionOverflow { width: u64, height: u64 },
    #[error("malformed header: {0}")]
    Header(&'static str),
    #[error("{format} cannot store {channels}-channel images")]
    ChannelCount {
        format: &'static str,
        channels: usize,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Image(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] thermoface_core::Error),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid file: {0}")]
    File(String),
    #[error("{0}")]
    Input(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 3 for numeric failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        use thermoface_core::Error as E;
        match self {
            Error::Core(
                E::NonFiniteLoss { .. }
                | E::NonFinite { .. }
                | E::SingularCovariance
                | E::DegenerateSamples(_),
            ) => 3,
            _ => 2,
        }
    }
}
