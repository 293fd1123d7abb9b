use alloc::vec::Vec;

use crate::filter::{correlate_cols, correlate_rows, gaussian_taps};
use crate::image::{to_luminance, Image};

/// Side of the Gaussian window for local statistics.
pub const WINDOW: usize = 7;
pub const WINDOW_SIGMA: f64 = 7.0 / 6.0;
/// Stabilizing constant, one gray level on the `[0, 1]` scale.
pub const STABILIZER: f64 = 1.0 / 255.0;

/// Mean-subtracted contrast-normalized coefficients of an image's luminance.
#[derive(Debug, Clone, PartialEq)]
pub struct MscnField {
    width: usize,
    height: usize,
    coefficients: Vec<f64>,
    local_std: Vec<f64>,
}

impl MscnField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Gaussian-weighted local standard deviation used as the divisor.
    pub fn local_std(&self) -> &[f64] {
        &self.local_std
    }

    /// Mean of the local standard deviation, the patch sharpness measure.
    pub fn sharpness(&self) -> f64 {
        self.local_std.iter().sum::<f64>() / self.local_std.len() as f64
    }
}

/// `(I - μ) / (σ + C)` with `μ`, `σ` from a 7×7 Gaussian window and
/// replicated borders.
pub fn mscn(img: &Image) -> MscnField {
    let lum = to_luminance(img);
    let (w, h) = (lum.width(), lum.height());
    let taps = gaussian_taps(WINDOW, WINDOW_SIGMA);
    let blur = |p: &[f64]| correlate_cols(&correlate_rows(p, w, h, &taps), w, h, &taps);
    let mu = blur(lum.data());
    let sq: Vec<f64> = lum.data().iter().map(|v| v * v).collect();
    let mu_sq = blur(&sq);
    let local_std: Vec<f64> = mu_sq
        .iter()
        .zip(&mu)
        .map(|(s, m)| libm::sqrt((s - m * m).abs()))
        .collect();
    let coefficients = lum
        .data()
        .iter()
        .zip(&mu)
        .zip(&local_std)
        .map(|((v, m), s)| (v - m) / (s + STABILIZER))
        .collect();
    MscnField {
        width: w,
        height: h,
        coefficients,
        local_std,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_all_zero() {
        let f = mscn(&Image::filled(12, 9, 1, 0.4).unwrap());
        assert!(f.coefficients().iter().all(|&v| v.abs() < 1e-9));
        assert!(f.sharpness() < 1e-7);
    }

    #[test]
    fn coefficients_are_finite() {
        let img = Image::from_fn(10, 10, |x, y| if (x + y) % 2 == 0 { 0.0 } else { 1.0 }).unwrap();
        assert!(mscn(&img).coefficients().iter().all(|v| v.is_finite()));
    }
}
