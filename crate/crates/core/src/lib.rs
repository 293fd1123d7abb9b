//! Pure algorithms for refining thermal face images, scoring their quality
//! without a reference, and turning regressed UV position maps into meshes,
//! pose renders and depth maps.
//!
//! Everything here is `no_std` and only needs `alloc`. File formats, the
//! command line and anything touching the filesystem live in the
//! `thermoface` crate.
//!
//! Module map:
//!
//! - [`image`], [`filter`], [`pyramid`]: the float raster, separable and 2-D
//!   convolution with replicated borders, binomial Gaussian/Laplacian pyramids.
//! - [`enhance`]: white balance, CLAHE, the four fusion weight maps and
//!   multi-scale Laplacian fusion.
//! - [`quality`]: MSCN coefficients, GGD/AGGD moment matching, BRISQUE and
//!   NIQE features and Mahalanobis scoring against a pristine model.
//! - [`posmap`]: position maps, mesh extraction, yaw rotation and a z-buffer
//!   rasterizer for shaded, textured and depth renders.
//! - [`regressor`]: a small encoder/decoder position-map network with
//!   hand-written reverse-mode gradients and the weight-masked loss.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod enhance;
pub mod error;
pub mod filter;
pub mod image;
pub mod posmap;
pub mod pyramid;
pub mod quality;
pub mod regressor;
pub(crate) mod rng;

pub use error::{Error, Result};
pub use image::Image;
