//! Natural-scene-statistics feature vectors.
//!
//! Each scale contributes 18 values in this order:
//!
//! | index | feature                                   |
//! |-------|-------------------------------------------|
//! | 0, 1  | GGD shape, variance of the MSCN field     |
//! | 2..6  | AGGD shape, mean, left var, right var of horizontal products |
//! | 6..10 | the same for vertical products            |
//! | 10..14| the same for main-diagonal products       |
//! | 14..18| the same for anti-diagonal products       |
//!
//! The second scale is computed on [`downsample2`] of the luminance, so a
//! full vector has 36 entries.

use alloc::vec::Vec;

use super::ggd::{fit_aggd_lenient, fit_ggd_unchecked, SHAPE_MIN};
use super::mscn::{mscn, MscnField};
use crate::error::{Error, Result};
use crate::image::{to_luminance, Image};
use crate::pyramid::downsample2;

pub const FEATURES_PER_SCALE: usize = 18;
pub const FEATURE_DIM: usize = 2 * FEATURES_PER_SCALE;
/// Smallest image accepted by [`brisque_features`].
pub const MIN_BRISQUE_SIZE: usize = 16;

/// Neighbour offsets `(dx, dy)` for the four pairwise-product orientations.
const PAIR_OFFSETS: [(isize, isize); 4] = [(1, 0), (0, 1), (1, 1), (-1, 1)];

fn pairwise_products(field: &MscnField, dx: isize, dy: isize) -> Vec<f64> {
    let (w, h) = (field.width() as isize, field.height() as isize);
    let c = field.coefficients();
    let mut out = Vec::with_capacity(c.len());
    for y in 0..h - dy {
        for x in 0.max(-dx)..(w - dx.max(0)) {
            let a = c[(y * w + x) as usize];
            let b = c[((y + dy) * w + x + dx) as usize];
            out.push(a * b);
        }
    }
    out
}

/// The 18 features of one scale from an MSCN field. Degenerate fits (flat
/// regions) fall back to the most peaked grid shape with zero spread.
pub fn scale_features(field: &MscnField) -> [f64; FEATURES_PER_SCALE] {
    let mut f = [0.0; FEATURES_PER_SCALE];
    match fit_ggd_unchecked(field.coefficients()) {
        Some(g) => {
            f[0] = g.shape;
            f[1] = g.scale * g.scale;
        }
        None => f[0] = SHAPE_MIN,
    }
    for (k, &(dx, dy)) in PAIR_OFFSETS.iter().enumerate() {
        let base = 2 + 4 * k;
        let products = pairwise_products(field, dx, dy);
        match fit_aggd_lenient(&products) {
            Some(a) => {
                f[base] = a.shape;
                f[base + 1] = a.mean;
                f[base + 2] = a.left_scale * a.left_scale;
                f[base + 3] = a.right_scale * a.right_scale;
            }
            None => f[base] = SHAPE_MIN,
        }
    }
    f
}

/// Both scales of features for a luminance image that is already known to be
/// large enough.
pub(crate) fn two_scale_features(lum: &Image) -> Vec<f64> {
    let mut v = Vec::with_capacity(FEATURE_DIM);
    v.extend_from_slice(&scale_features(&mscn(lum)));
    v.extend_from_slice(&scale_features(&mscn(&downsample2(lum))));
    v
}

/// The 36-entry spatial feature vector of a whole image.
pub fn brisque_features(img: &Image) -> Result<Vec<f64>> {
    if img.width() < MIN_BRISQUE_SIZE || img.height() < MIN_BRISQUE_SIZE {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: MIN_BRISQUE_SIZE,
        });
    }
    Ok(two_scale_features(&to_luminance(img)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NiqeConfig {
    /// Side of the square, non-overlapping patches.
    pub patch_size: usize,
    /// Patches whose sharpness reaches this quantile of all patch
    /// sharpness values are kept.
    pub sharpness_quantile: f64,
}

impl Default for NiqeConfig {
    fn default() -> Self {
        Self {
            patch_size: 96,
            sharpness_quantile: 0.75,
        }
    }
}

/// Linear-interpolation quantile of unsorted values.
pub(crate) fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-patch 36-entry feature vectors of the sharp patches of an image, in
/// raster order of the patch grid. Each patch is processed on its own, so the
/// result only depends on the set of patches.
pub fn niqe_features(img: &Image, cfg: &NiqeConfig) -> Result<Vec<Vec<f64>>> {
    let p = cfg.patch_size;
    if p < MIN_BRISQUE_SIZE {
        return Err(Error::InvalidConfig("patch size must be at least 16"));
    }
    let (nx, ny) = (img.width() / p, img.height() / p);
    if nx == 0 || ny == 0 {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: p,
        });
    }
    let lum = to_luminance(img);
    let mut patches = Vec::with_capacity(nx * ny);
    for py in 0..ny {
        for px in 0..nx {
            let patch = lum.crop(px * p, py * p, p, p)?;
            let field = mscn(&patch);
            patches.push((field.sharpness(), patch, field));
        }
    }
    let sharpness: Vec<f64> = patches.iter().map(|(s, _, _)| *s).collect();
    let threshold = quantile(&sharpness, cfg.sharpness_quantile);
    Ok(patches
        .into_iter()
        .filter(|(s, _, _)| *s > 0.0 && *s >= threshold)
        .map(|(_, patch, field)| {
            let mut v = Vec::with_capacity(FEATURE_DIM);
            v.extend_from_slice(&scale_features(&field));
            v.extend_from_slice(&scale_features(&mscn(&downsample2(&patch))));
            v
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_counts() {
        let img = Image::from_fn(5, 4, |x, y| (x * y) as f64 / 20.0).unwrap();
        let f = mscn(&img);
        assert_eq!(pairwise_products(&f, 1, 0).len(), 4 * 4);
        assert_eq!(pairwise_products(&f, 0, 1).len(), 5 * 3);
        assert_eq!(pairwise_products(&f, 1, 1).len(), 4 * 3);
        assert_eq!(pairwise_products(&f, -1, 1).len(), 4 * 3);
    }

    #[test]
    fn anti_diagonal_pairs_correct_neighbour() {
        let img = Image::from_fn(3, 2, |x, y| (x + 3 * y) as f64 / 8.0).unwrap();
        let f = mscn(&img);
        let c = f.coefficients();
        let d2 = pairwise_products(&f, -1, 1);
        assert_eq!(d2[0], c[1] * c[3]);
        assert_eq!(d2[1], c[2] * c[4]);
    }

    #[test]
    fn brisque_size_limits() {
        assert!(brisque_features(&Image::filled(15, 40, 1, 0.2).unwrap()).is_err());
        let v = brisque_features(&Image::filled(16, 16, 1, 0.2).unwrap()).unwrap();
        assert_eq!(v.len(), FEATURE_DIM);
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 0.75), 3.25);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn niqe_patch_counts() {
        let cfg = NiqeConfig::default();
        let img = Image::from_fn(96, 96, |x, y| ((x * 7 + y * 13) % 10) as f64 / 10.0).unwrap();
        assert_eq!(niqe_features(&img, &cfg).unwrap().len(), 1);
        let flat = Image::filled(192, 192, 1, 0.5).unwrap();
        assert!(niqe_features(&flat, &cfg).unwrap().is_empty());
        assert!(niqe_features(&Image::filled(95, 200, 1, 0.5).unwrap(), &cfg).is_err());
    }
}
