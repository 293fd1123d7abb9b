//! The four per-pixel fusion weights and their normalization.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filter::{binomial_blur_plane, convolve, Kernel};
use crate::image::{to_luminance, Image};

/// Nonnegative per-pixel weights in the geometry of the image they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl WeightMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height || width == 0 || height == 0 {
            return Err(Error::BufferLength {
                expected: width * height,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(
                "weights must be finite and nonnegative",
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

    pub fn as_image(&self) -> Image {
        Image::from_planar_unchecked(self.width, self.height, 1, self.data.clone())
    }

    /// Rescales to `[0, 1]` by the maximum, for display.
    pub fn to_display_image(&self) -> Image {
        let max = self.data.iter().copied().fold(0.0, f64::max);
        let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
        Image::from_planar_unchecked(
            self.width,
            self.height,
            1,
            self.data.iter().map(|v| v * scale).collect(),
        )
    }

    fn from_plane(img: &Image, data: Vec<f64>) -> Self {
        let data = data
            .into_iter()
            .map(|v| if v.is_finite() { v.abs() } else { 0.0 })
            .collect();
        Self {
            width: img.width(),
            height: img.height(),
            data,
        }
    }
}

/// Absolute response of the 4-neighbour discrete Laplacian on luminance.
pub fn laplacian_contrast_weight(img: &Image) -> WeightMap {
    let lum = to_luminance(img);
    let k = Kernel::Grid {
        width: 3,
        height: 3,
        taps: alloc::vec![0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0],
    };
    let resp = convolve(&lum, &k).expect("static kernel is valid");
    WeightMap::from_plane(img, resp.into_data())
}

/// `|L - low_pass(L)|`, the low pass being two passes of the binomial blur.
pub fn local_contrast_weight(img: &Image) -> WeightMap {
    let lum = to_luminance(img);
    let (w, h) = (lum.width(), lum.height());
    let once = binomial_blur_plane(lum.data(), w, h);
    let twice = binomial_blur_plane(&once, w, h);
    let data = lum.data().iter().zip(&twice).map(|(a, b)| a - b).collect();
    WeightMap::from_plane(img, data)
}

/// Frequency-tuned saliency: Euclidean distance over channels between the
/// global channel means and a binomial-blurred copy of the image.
pub fn saliency_weight(img: &Image) -> WeightMap {
    let (w, h) = (img.width(), img.height());
    let n = img.pixel_count();
    let mut acc = alloc::vec![0.0; n];
    for c in 0..img.channels() {
        let plane = img.plane(c);
        let mean = plane.iter().sum::<f64>() / n as f64;
        let blurred = binomial_blur_plane(plane, w, h);
        for (a, b) in acc.iter_mut().zip(&blurred) {
            let d = mean - b;
            *a += d * d;
        }
    }
    WeightMap::from_plane(img, acc.into_iter().map(libm::sqrt).collect())
}

/// Gaussian preference for mid-gray luminance.
pub fn exposedness_weight(img: &Image, sigma: f64) -> WeightMap {
    let lum = to_luminance(img);
    let two_s2 = 2.0 * sigma * sigma;
    let data = lum
        .data()
        .iter()
        .map(|&l| libm::exp(-(l - 0.5) * (l - 0.5) / two_s2))
        .collect();
    WeightMap::from_plane(img, data)
}

/// The four maps of one fusion input, in the fixed order
/// laplacian, local contrast, saliency, exposedness.
pub fn weight_maps(img: &Image, exposedness_sigma: f64) -> [WeightMap; 4] {
    [
        laplacian_contrast_weight(img),
        local_contrast_weight(img),
        saliency_weight(img),
        exposedness_weight(img, exposedness_sigma),
    ]
}

/// Aggregates each input's maps by product, adds `epsilon`, and normalizes
/// across inputs so the weights at every pixel sum to one.
pub fn normalize_weights<M: AsRef<[WeightMap]>>(
    per_input: &[M],
    epsilon: f64,
) -> Result<Vec<WeightMap>> {
    let first = per_input
        .first()
        .and_then(|m| m.as_ref().first())
        .ok_or(Error::DimensionMismatch("no weight maps"))?;
    let (w, h) = (first.width, first.height);
    let count = per_input[0].as_ref().len();
    let mut aggregates = Vec::with_capacity(per_input.len());
    for maps in per_input {
        let maps = maps.as_ref();
        if maps.len() != count || maps.is_empty() {
            return Err(Error::DimensionMismatch(
                "inputs carry different numbers of maps",
            ));
        }
        if maps.iter().any(|m| m.width != w || m.height != h) {
            return Err(Error::DimensionMismatch("weight maps differ in size"));
        }
        let agg: Vec<f64> = (0..w * h)
            .map(|i| maps.iter().map(|m| m.data[i]).product::<f64>() + epsilon)
            .collect();
        aggregates.push(agg);
    }
    let mut out: Vec<Vec<f64>> = aggregates.clone();
    for i in 0..w * h {
        let total: f64 = aggregates.iter().map(|a| a[i]).sum();
        for (o, a) in out.iter_mut().zip(&aggregates) {
            o[i] = a[i] / total;
        }
    }
    Ok(out
        .into_iter()
        .map(|data| WeightMap {
            width: w,
            height: h,
            data,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn impulse(size: usize, at: usize) -> Image {
        Image::from_fn(
            size,
            size,
            |x, y| if x == at && y == at { 1.0 } else { 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn constant_image_gives_zero_maps() {
        let img = Image::filled(16, 12, 3, 0.3).unwrap();
        for m in [
            laplacian_contrast_weight(&img),
            local_contrast_weight(&img),
            saliency_weight(&img),
        ] {
            assert!(m.data().iter().all(|&v| v.abs() < 1e-14), "{m:?}");
        }
        let e = exposedness_weight(&img, 0.25);
        assert!(e.data().iter().all(|&v| v == e.data()[0]));
    }

    #[test]
    fn laplacian_of_impulse() {
        let m = laplacian_contrast_weight(&impulse(7, 3));
        assert_eq!(m.data()[3 * 7 + 3], 4.0);
        for (x, y) in [(2, 3), (4, 3), (3, 2), (3, 4)] {
            assert_eq!(m.data()[y * 7 + x], 1.0);
        }
        assert_eq!(m.data()[2 * 7 + 2], 0.0);
    }

    #[test]
    fn laplacian_of_ramp_interior_vanishes() {
        let img = Image::from_fn(8, 8, |x, y| (x as f64 + 2.0 * y as f64) / 32.0).unwrap();
        let m = laplacian_contrast_weight(&img);
        for y in 1..7 {
            for x in 1..7 {
                assert!(m.data()[y * 8 + x] < 1e-15);
            }
        }
    }

    #[test]
    fn exposedness_values() {
        let img = Image::from_planar(4, 1, 1, alloc::vec![0.5, 0.75, 0.0, 1.0]).unwrap();
        let e = exposedness_weight(&img, 0.25);
        assert_eq!(e.data()[0], 1.0);
        assert!((e.data()[1] - libm::exp(-0.5)).abs() < 1e-15);
        assert_eq!(e.data()[2], e.data()[3]);
    }

    #[test]
    fn saliency_peaks_at_impulse() {
        let m = saliency_weight(&impulse(9, 4));
        let peak = m.data()[4 * 9 + 4];
        assert!(m.data().iter().all(|&v| v <= peak));
        let mean = 1.0 / 81.0;
        assert!((peak - (36.0 / 256.0 - mean)).abs() < 1e-15);
    }

    #[test]
    fn normalization_of_identical_and_zero_inputs() {
        let a = weight_maps(&impulse(8, 3), 0.25);
        let both = normalize_weights(&[a.clone(), a.clone()], 1e-9).unwrap();
        assert!(both
            .iter()
            .all(|m| m.data().iter().all(|&v| (v - 0.5).abs() < 1e-15)));

        let zero = [0, 1, 2, 3].map(|_| WeightMap::filled(2, 2, 0.0).unwrap());
        let some = [0, 1, 2, 3].map(|_| WeightMap::filled(2, 2, 0.5).unwrap());
        let n = normalize_weights(&[zero, some], 1e-9).unwrap();
        let wb = 0.0625;
        assert!((n[0].data()[0] - 1e-9 / (2e-9 + wb)).abs() < 1e-18);
        assert!((n[1].data()[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn normalization_rejects_mismatch() {
        let a = [0, 1, 2, 3].map(|_| WeightMap::filled(2, 2, 1.0).unwrap());
        let b = [0, 1, 2, 3].map(|_| WeightMap::filled(3, 2, 1.0).unwrap());
        assert!(normalize_weights(&[a, b], 1e-9).is_err());
    }
}
