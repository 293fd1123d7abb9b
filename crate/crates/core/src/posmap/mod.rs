//! Position maps and everything downstream of the regressor: mesh
//! extraction, OBJ text, yaw rotation and rasterized renders.
//!
//! A position map is a UV-indexed raster whose three channels hold the
//! surface point seen at each texel: `x`, `y` in source-image pixel
//! coordinates (integer values are pixel centers) and `z` in the same unit,
//! larger meaning closer to the camera.

mod mesh;
mod obj;
mod raster;

pub use mesh::{mesh_from_posmap, rotate_yaw, rotate_yaw_degrees, texture_vertices, FaceMesh};
pub use obj::{export_obj, import_obj};
pub use raster::{render_depth, render_mesh, RenderMode};

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Yaw angles of the default pose strip, in degrees.
pub const DEFAULT_POSES: [f64; 5] = [-30.0, -15.0, 0.0, 15.0, 30.0];

/// Planar `3 × height × width` surface coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl PositionMap {
    /// `data` is planar: all `x`, then all `y`, then all `z`, each row-major.
    pub fn from_planar(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroOutputSize);
        }
        if data.len() != 3 * width * height {
            return Err(Error::BufferLength {
                expected: 3 * width * height,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let n = width * height;
        let mut data = alloc::vec![0.0; 3 * n];
        for v in 0..height {
            for u in 0..width {
                let p = f(u, v);
                for c in 0..3 {
                    data[c * n + v * width + u] = p[c];
                }
            }
        }
        Self::from_planar(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, u: usize, v: usize) -> [f64; 3] {
        let n = self.width * self.height;
        let i = v * self.width + u;
        [self.data[i], self.data[n + i], self.data[2 * n + i]]
    }

    /// Multiplies every coordinate by `(sx, sy, sz)`.
    pub fn scaled(&self, sx: f64, sy: f64, sz: f64) -> PositionMap {
        let n = self.width * self.height;
        let s = [sx, sy, sz];
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, v)| v * s[i / n])
            .collect();
        PositionMap {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Per-texel nonnegative loss weights aligned with a position map.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMask {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl WeightMask {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroOutputSize);
        }
        if data.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(
                "mask weights must be finite and nonnegative",
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, alloc::vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[v * self.width + u]
    }

    /// Every weight multiplied by `c`, which must be nonnegative.
    pub fn scaled(&self, c: f64) -> Result<WeightMask> {
        WeightMask::new(
            self.width,
            self.height,
            self.data.iter().map(|v| v * c).collect(),
        )
    }

    /// Nearest-neighbour resample to `width × height`.
    pub fn resample_nearest(&self, width: usize, height: usize) -> Result<WeightMask> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroOutputSize);
        }
        let mut data = Vec::with_capacity(width * height);
        for v in 0..height {
            let sv = ((2 * v + 1) * self.height / (2 * height)).min(self.height - 1);
            for u in 0..width {
                let su = ((2 * u + 1) * self.width / (2 * width)).min(self.width - 1);
                data.push(self.get(su, sv));
            }
        }
        WeightMask::new(width, height, data)
    }
}

/// A head pose; only yaw is modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    yaw: f64,
}

impl Pose {
    pub fn new(yaw_degrees: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&yaw_degrees) {
            return Err(Error::InvalidPose(yaw_degrees));
        }
        Ok(Self { yaw: yaw_degrees })
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }
}
