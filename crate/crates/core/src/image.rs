//! The planar float raster every other module works on.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Rec. 601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// A `width × height × channels` raster stored channel-major (planar),
/// samples nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from planar samples, rejecting bad geometry and
    /// non-finite values.
    pub fn from_planar(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        check_geometry(width, height, channels)?;
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::BufferLength {
                expected,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::from_planar(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    /// Builds a single-channel image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_planar(width, height, 1, data)
    }

    /// Stacks equally sized single-channel planes into one image.
    pub fn from_planes(planes: &[Image]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or(Error::DimensionMismatch("no planes"))?;
        let mut data = Vec::with_capacity(first.data.len() * planes.len());
        for p in planes {
            if p.channels != 1 || p.width != first.width || p.height != first.height {
                return Err(Error::DimensionMismatch(
                    "planes differ in size or are not single-channel",
                ));
            }
            data.extend_from_slice(&p.data);
        }
        Self::from_planar(first.width, first.height, planes.len(), data)
    }

    pub(crate) fn from_planar_unchecked(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.pixel_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[c * self.pixel_count() + y * self.width + x]
    }

    /// Sample with replicated (clamp-to-edge) borders.
    pub fn get_clamped(&self, x: isize, y: isize, c: usize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y, c)
    }

    /// Extracts channel `c` as a single-channel image.
    pub fn channel(&self, c: usize) -> Image {
        Image::from_planar_unchecked(self.width, self.height, 1, self.plane(c).to_vec())
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Applies `f` to every sample. Non-finite results are replaced by zero so
    /// the finiteness invariant survives.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        let data = self
            .data
            .iter()
            .map(|&v| {
                let r = f(v);
                if r.is_finite() {
                    r
                } else {
                    0.0
                }
            })
            .collect();
        Image::from_planar_unchecked(self.width, self.height, self.channels, data)
    }

    pub fn clamp01(&self) -> Image {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// Copies a single-channel image into three identical channels; other
    /// channel counts are returned unchanged.
    pub fn to_rgb(&self) -> Image {
        if self.channels != 1 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.data.len() * 3);
        for _ in 0..3 {
            data.extend_from_slice(&self.data);
        }
        Image::from_planar_unchecked(self.width, self.height, 3, data)
    }

    /// Extracts a `w × h` window starting at `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::DimensionMismatch("crop window outside image"));
        }
        let mut data = Vec::with_capacity(w * h * self.channels);
        for c in 0..self.channels {
            let plane = self.plane(c);
            for y in y0..y0 + h {
                data.extend_from_slice(&plane[y * self.width + x0..y * self.width + x0 + w]);
            }
        }
        Ok(Image::from_planar_unchecked(w, h, self.channels, data))
    }

    /// Bilinear sample of channel `c` at continuous pixel coordinates, where
    /// integer coordinates are pixel centers. Coordinates outside the image
    /// are clamped to the border.
    pub fn sample_bilinear(&self, x: f64, y: f64, c: usize) -> f64 {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = if x.is_finite() {
            x.clamp(0.0, max_x)
        } else {
            0.0
        };
        let y = if y.is_finite() {
            y.clamp(0.0, max_y)
        } else {
            0.0
        };
        let x0 = x as usize;
        let y0 = y as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self.get(x0, y0, c) * (1.0 - fx) + self.get(x1, y0, c) * fx;
        let bottom = self.get(x0, y1, c) * (1.0 - fx) + self.get(x1, y1, c) * fx;
        if fy == 0.0 {
            top
        } else {
            top * (1.0 - fy) + bottom * fy
        }
    }

    /// Bilinear resize to `w × h` aligning pixel corners (area-style centers).
    pub fn resize_bilinear(&self, w: usize, h: usize) -> Result<Image> {
        check_geometry(w, h, self.channels)?;
        let sx = self.width as f64 / w as f64;
        let sy = self.height as f64 / h as f64;
        let mut data = Vec::with_capacity(w * h * self.channels);
        for c in 0..self.channels {
            for y in 0..h {
                let src_y = (y as f64 + 0.5) * sy - 0.5;
                for x in 0..w {
                    let src_x = (x as f64 + 0.5) * sx - 0.5;
                    data.push(self.sample_bilinear(src_x, src_y, c));
                }
            }
        }
        Ok(Image::from_planar_unchecked(w, h, self.channels, data))
    }
}

pub(crate) fn check_geometry(width: usize, height: usize, channels: usize) -> Result<()> {
    let ok = width > 0
        && height > 0
        && (channels == 1 || channels == 3)
        && width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .is_some();
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidGeometry {
            width,
            height,
            channels,
        })
    }
}

/// Luminance of an image. Three-channel input is combined with
/// [`LUMA_WEIGHTS`]; single-channel input is returned as a copy.
pub fn to_luminance(img: &Image) -> Image {
    if img.channels == 1 {
        return img.clone();
    }
    let n = img.pixel_count();
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let data = (0..n)
        .map(|i| {
            // gray pixels map to themselves exactly; the weights sum to 1
            // only up to rounding
            if r[i] == g[i] && g[i] == b[i] {
                r[i]
            } else {
                LUMA_WEIGHTS[0] * r[i] + LUMA_WEIGHTS[1] * g[i] + LUMA_WEIGHTS[2] * b[i]
            }
        })
        .collect();
    Image::from_planar_unchecked(img.width, img.height, 1, data)
}
