use alloc::vec::Vec;

use super::weights::WeightMap;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::pyramid::{
    collapse_laplacian, gaussian_pyramid, laplacian_pyramid, PyramidKind, PyramidStack,
};

/// Multi-scale fusion: every Laplacian level of the output is the sum over
/// inputs of that input's Laplacian level times the matching Gaussian level
/// of its normalized weight map. The collapsed result is clamped to `[0, 1]`.
pub fn fuse(inputs: &[Image], weights: &[WeightMap], levels: usize) -> Result<Image> {
    let first = inputs
        .first()
        .ok_or(Error::DimensionMismatch("no fusion inputs"))?;
    if inputs.len() != weights.len() {
        return Err(Error::DimensionMismatch(
            "one weight map per input is required",
        ));
    }
    for (img, wm) in inputs.iter().zip(weights) {
        if !img.same_dims(first) || img.channels() != first.channels() {
            return Err(Error::DimensionMismatch("fusion inputs differ in geometry"));
        }
        if wm.width() != first.width() || wm.height() != first.height() {
            return Err(Error::DimensionMismatch(
                "weight map does not match its input",
            ));
        }
    }

    let mut fused: Option<Vec<Vec<f64>>> = None;
    for (img, wm) in inputs.iter().zip(weights) {
        let lap = laplacian_pyramid(img, levels)?;
        let gw = gaussian_pyramid(&wm.as_image(), levels)?;
        let acc = fused.get_or_insert_with(|| {
            lap.levels()
                .iter()
                .map(|l| alloc::vec![0.0; l.data().len()])
                .collect()
        });
        for ((dst, l), g) in acc.iter_mut().zip(lap.levels()).zip(gw.levels()) {
            let n = l.pixel_count();
            for c in 0..l.channels() {
                let plane = l.plane(c);
                let out = &mut dst[c * n..(c + 1) * n];
                for i in 0..n {
                    out[i] += g.data()[i] * plane[i];
                }
            }
        }
    }

    let mut dims = Vec::with_capacity(levels);
    let (mut w, mut h) = (first.width(), first.height());
    for _ in 0..levels {
        dims.push((w, h));
        w = w.div_ceil(2);
        h = h.div_ceil(2);
    }
    let fused_levels = fused
        .unwrap_or_default()
        .into_iter()
        .zip(dims)
        .map(|(data, (w, h))| Image::from_planar_unchecked(w, h, first.channels(), data))
        .collect();
    let stack = PyramidStack::new(PyramidKind::Laplacian, fused_levels)?;
    Ok(collapse_laplacian(&stack)?.clamp01())
}
