//! Linear filtering with replicated borders.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;

/// The 5-tap binomial filter used by the pyramids and the low-pass stages.
pub const BINOMIAL5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// A filter kernel. Taps are applied as a correlation centered on the middle
/// tap, which is the same as convolution for the symmetric kernels used here.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// The same odd-length 1-D taps along x and then along y.
    Separable(Vec<f64>),
    /// Odd × odd grid, row-major.
    Grid {
        width: usize,
        height: usize,
        taps: Vec<f64>,
    },
}

impl Kernel {
    pub fn separable(taps: &[f64]) -> Result<Self> {
        let k = Kernel::Separable(taps.to_vec());
        k.validate()?;
        Ok(k)
    }

    pub fn grid(width: usize, height: usize, taps: &[f64]) -> Result<Self> {
        let k = Kernel::Grid {
            width,
            height,
            taps: taps.to_vec(),
        };
        k.validate()?;
        Ok(k)
    }

    pub fn binomial5() -> Self {
        Kernel::Separable(BINOMIAL5.to_vec())
    }

    pub fn identity() -> Self {
        Kernel::Separable(vec![1.0])
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h, taps) = match self {
            Kernel::Separable(t) => (t.len(), t.len(), t.as_slice()),
            Kernel::Grid {
                width,
                height,
                taps,
            } => {
                if taps.len() != width * height {
                    return Err(Error::InvalidKernel(
                        "grid tap count does not match its size",
                    ));
                }
                (*width, *height, taps.as_slice())
            }
        };
        if w % 2 == 0 || h % 2 == 0 {
            return Err(Error::InvalidKernel("side lengths must be odd"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidKernel("taps must be finite"));
        }
        Ok(())
    }

    /// Sum of all taps of the equivalent 2-D kernel.
    pub fn normalization(&self) -> f64 {
        match self {
            Kernel::Separable(t) => {
                let s: f64 = t.iter().sum();
                s * s
            }
            Kernel::Grid { taps, .. } => taps.iter().sum(),
        }
    }
}

/// Convolves every channel of `img` with `kernel`, replicating edge pixels.
pub fn convolve(img: &Image, kernel: &Kernel) -> Result<Image> {
    kernel.validate()?;
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(img.data().len());
    for c in 0..img.channels() {
        let plane = img.plane(c);
        match kernel {
            Kernel::Separable(taps) => {
                let tmp = correlate_rows(plane, w, h, taps);
                out.extend(correlate_cols(&tmp, w, h, taps));
            }
            Kernel::Grid {
                width,
                height,
                taps,
            } => {
                out.extend(correlate_grid(plane, w, h, *width, *height, taps));
            }
        }
    }
    Ok(Image::from_planar_unchecked(w, h, img.channels(), out))
}

/// Horizontal 1-D pass over a single plane.
pub(crate) fn correlate_rows(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let last = w as isize - 1;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let sx = (x as isize + k as isize - r).clamp(0, last) as usize;
                acc += t * row[sx];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Vertical 1-D pass over a single plane.
pub(crate) fn correlate_cols(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let last = h as isize - 1;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let sy = (y as isize + k as isize - r).clamp(0, last) as usize;
                acc += t * plane[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn correlate_grid(
    plane: &[f64],
    w: usize,
    h: usize,
    kw: usize,
    kh: usize,
    taps: &[f64],
) -> Vec<f64> {
    let (rx, ry) = ((kw / 2) as isize, (kh / 2) as isize);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for ky in 0..kh {
                let sy = (y as isize + ky as isize - ry).clamp(0, h as isize - 1) as usize;
                for kx in 0..kw {
                    let sx = (x as isize + kx as isize - rx).clamp(0, w as isize - 1) as usize;
                    acc += taps[ky * kw + kx] * plane[sy * w + sx];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Blurs a single-channel plane with the separable binomial kernel.
pub(crate) fn binomial_blur_plane(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let tmp = correlate_rows(plane, w, h, &BINOMIAL5);
    correlate_cols(&tmp, w, h, &BINOMIAL5)
}

/// Normalized 1-D Gaussian taps of odd length `size`.
pub fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let r = (size / 2) as f64;
    let mut taps: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            libm::exp(-(d * d) / (2.0 * sigma * sigma))
        })
        .collect();
    let s: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= s;
    }
    taps
}
