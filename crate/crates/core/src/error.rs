use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid image geometry {width}x{height}x{channels}")]
    InvalidGeometry {
        width: usize,
        height: usize,
        channels: usize,
    },
    #[error("sample buffer holds {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("invalid kernel: {0}")]
    InvalidKernel(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("pyramid depth {levels} outside 1..={max}")]
    InvalidLevels { levels: usize, max: usize },
    #[error("cannot upsample {width}x{height} to {target_width}x{target_height}")]
    InvalidUpsampleTarget {
        width: usize,
        height: usize,
        target_width: usize,
        target_height: usize,
    },
    #[error("channel {channel} has zero mean")]
    DegenerateChannel { channel: usize },
    #[error("CLAHE tile would be {tile_width}x{tile_height}, minimum is 2x2")]
    TileTooSmall {
        tile_width: usize,
        tile_height: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("degenerate samples: {0}")]
    DegenerateSamples(&'static str),
    #[error("need at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },
    #[error("image {width}x{height} is smaller than the minimum {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("no sharp patches in image")]
    NoSharpPatches,
    #[error("covariance matrix is singular")]
    SingularCovariance,
    #[error("no texel passes the mask threshold")]
    EmptyMesh,
    #[error("output size must be nonzero")]
    ZeroOutputSize,
    #[error("yaw {0} outside [-90, 90]")]
    InvalidPose(f64),
    #[error("invalid mesh: {0}")]
    InvalidMesh(&'static str),
    #[error("OBJ line {line}: {message}")]
    ObjParse { line: usize, message: &'static str },
    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("invalid network spec: {0}")]
    InvalidSpec(&'static str),
    #[error("non-finite loss {loss} at iteration {iteration}")]
    NonFiniteLoss { iteration: usize, loss: f64 },
}
