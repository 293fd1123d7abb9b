//! File formats, synthetic corpora, configuration and the batch commands of
//! the `thermoface` tool. The algorithms live in `thermoface-core`.

pub mod assets;
pub mod codec;
pub mod config;
pub mod corpus;
pub mod error;
pub mod files;
pub mod pipeline;

pub use error::{Error, FormatError, Result};
