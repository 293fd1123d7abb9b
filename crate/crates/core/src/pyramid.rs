//! Binomial Gaussian and Laplacian pyramids.
//!
//! Halving uses ceiling division so odd sizes never drift; the upsampler is
//! always told the exact size of the finer level it reconstructs.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filter::{binomial_blur_plane, BINOMIAL5};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PyramidKind {
    Gaussian,
    Laplacian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PyramidStack {
    kind: PyramidKind,
    levels: Vec<Image>,
}

impl PyramidStack {
    /// Wraps precomputed levels, checking the halving invariant.
    pub fn new(kind: PyramidKind, levels: Vec<Image>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidLevels { levels: 0, max: 0 });
        }
        for pair in levels.windows(2) {
            let (fine, coarse) = (&pair[0], &pair[1]);
            if coarse.width() != fine.width().div_ceil(2)
                || coarse.height() != fine.height().div_ceil(2)
                || coarse.channels() != fine.channels()
            {
                return Err(Error::DimensionMismatch(
                    "pyramid levels must halve with ceiling division",
                ));
            }
        }
        Ok(Self { kind, levels })
    }

    pub fn kind(&self) -> PyramidKind {
        self.kind
    }

    pub fn levels(&self) -> &[Image] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn into_levels(self) -> Vec<Image> {
        self.levels
    }
}

/// Deepest pyramid allowed for a `w × h` image: `floor(log2(min(w, h)))`,
/// but never less than the trivial one-level pyramid.
pub fn max_levels(w: usize, h: usize) -> usize {
    let m = w.min(h).max(1);
    (m.ilog2() as usize).max(1)
}

fn check_levels(img: &Image, levels: usize) -> Result<()> {
    let max = max_levels(img.width(), img.height());
    if levels == 0 || levels > max {
        return Err(Error::InvalidLevels { levels, max });
    }
    Ok(())
}

/// Binomial blur followed by keeping even rows and columns.
pub fn downsample2(img: &Image) -> Image {
    let (w, h) = (img.width(), img.height());
    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    let mut out = Vec::with_capacity(ow * oh * img.channels());
    for c in 0..img.channels() {
        let blurred = binomial_blur_plane(img.plane(c), w, h);
        for y in 0..oh {
            for x in 0..ow {
                out.push(blurred[2 * y * w + 2 * x]);
            }
        }
    }
    Image::from_planar_unchecked(ow, oh, img.channels(), out)
}

/// Zero-insertion to `target_w × target_h` followed by the binomial blur with
/// gain 2 per axis. Samples beyond the source edge are replicated before the
/// zero insertion, so constants are preserved right up to the border.
pub fn upsample2(img: &Image, target_w: usize, target_h: usize) -> Result<Image> {
    let (w, h) = (img.width(), img.height());
    let valid = |src: usize, dst: usize| dst == 2 * src || dst + 1 == 2 * src;
    if !valid(w, target_w) || !valid(h, target_h) {
        return Err(Error::InvalidUpsampleTarget {
            width: w,
            height: h,
            target_width: target_w,
            target_height: target_h,
        });
    }
    let mut out = Vec::with_capacity(target_w * target_h * img.channels());
    for c in 0..img.channels() {
        let plane = img.plane(c);
        // rows: h × target_w
        let mut tmp = vec![0.0; h * target_w];
        for y in 0..h {
            let row = &plane[y * w..(y + 1) * w];
            for x in 0..target_w {
                tmp[y * target_w + x] = interpolate(x, w, |i| row[i]);
            }
        }
        for y in 0..target_h {
            for x in 0..target_w {
                out.push(interpolate(y, h, |i| tmp[i * target_w + x]));
            }
        }
    }
    Ok(Image::from_planar_unchecked(
        target_w,
        target_h,
        img.channels(),
        out,
    ))
}

/// One output sample of the 1-D zero-insert + 2×binomial interpolator.
#[inline]
fn interpolate(x: usize, n: usize, src: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for (k, &t) in BINOMIAL5.iter().enumerate() {
        let pos = x as isize - (k as isize - 2);
        if pos.rem_euclid(2) == 0 {
            let i = (pos / 2).clamp(0, n as isize - 1) as usize;
            acc += 2.0 * t * src(i);
        }
    }
    acc
}

pub fn gaussian_pyramid(img: &Image, levels: usize) -> Result<PyramidStack> {
    check_levels(img, levels)?;
    let mut out = Vec::with_capacity(levels);
    out.push(img.clone());
    for i in 1..levels {
        let next = downsample2(&out[i - 1]);
        out.push(next);
    }
    Ok(PyramidStack {
        kind: PyramidKind::Gaussian,
        levels: out,
    })
}

pub fn laplacian_pyramid(img: &Image, levels: usize) -> Result<PyramidStack> {
    let gauss = gaussian_pyramid(img, levels)?.levels;
    let mut out = Vec::with_capacity(levels);
    for i in 0..levels - 1 {
        let fine = &gauss[i];
        let up = upsample2(&gauss[i + 1], fine.width(), fine.height())?;
        out.push(zip_planar(fine, &up, |a, b| a - b));
    }
    out.push(gauss[levels - 1].clone());
    Ok(PyramidStack {
        kind: PyramidKind::Laplacian,
        levels: out,
    })
}

/// Inverts [`laplacian_pyramid`].
pub fn collapse_laplacian(p: &PyramidStack) -> Result<Image> {
    if p.kind != PyramidKind::Laplacian {
        return Err(Error::DimensionMismatch(
            "collapse needs a Laplacian pyramid",
        ));
    }
    let mut levels = p.levels.iter().rev();
    let mut acc = levels
        .next()
        .cloned()
        .ok_or(Error::InvalidLevels { levels: 0, max: 0 })?;
    for detail in levels {
        let up = upsample2(&acc, detail.width(), detail.height())?;
        acc = zip_planar(detail, &up, |a, b| a + b);
    }
    Ok(acc)
}

/// Elementwise combination of two images with identical geometry.
pub(crate) fn zip_planar(a: &Image, b: &Image, f: impl Fn(f64, f64) -> f64) -> Image {
    debug_assert!(a.same_dims(b) && a.channels() == b.channels());
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| f(x, y))
        .collect();
    Image::from_planar_unchecked(a.width(), a.height(), a.channels(), data)
}
