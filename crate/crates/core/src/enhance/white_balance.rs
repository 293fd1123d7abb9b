use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{Image, LUMA_WEIGHTS};

/// Gains are clamped to this range so a nearly empty channel cannot explode.
pub const GAIN_RANGE: (f64, f64) = (0.5, 2.0);

/// Per-channel gray-world gains `mean(luminance) / mean(channel)`.
pub fn gray_world_gains(img: &Image) -> Result<[f64; 3]> {
    let rgb = img.to_rgb();
    let n = rgb.pixel_count() as f64;
    let mut means = [0.0; 3];
    for (c, m) in means.iter_mut().enumerate() {
        *m = rgb.plane(c).iter().sum::<f64>() / n;
        if *m <= 0.0 {
            return Err(Error::DegenerateChannel { channel: c });
        }
    }
    let mean_lum: f64 = LUMA_WEIGHTS.iter().zip(&means).map(|(w, m)| w * m).sum();
    let mut gains = [1.0; 3];
    for (g, m) in gains.iter_mut().zip(&means) {
        let raw = mean_lum / m;
        // equal means must give exactly unit gain despite rounding in mean_lum
        *g = if (raw - 1.0).abs() < 1e-12 {
            1.0
        } else {
            raw.clamp(GAIN_RANGE.0, GAIN_RANGE.1)
        };
    }
    Ok(gains)
}

/// Gray-world white balance. Single-channel input is replicated to three
/// channels first; the output always has three channels.
pub fn white_balance(img: &Image) -> Result<Image> {
    let gains = gray_world_gains(img)?;
    let rgb = img.to_rgb();
    let mut data = Vec::with_capacity(rgb.data().len());
    for (c, g) in gains.iter().enumerate() {
        data.extend(rgb.plane(c).iter().map(|v| (v * g).clamp(0.0, 1.0)));
    }
    Image::from_planar(rgb.width(), rgb.height(), 3, data)
}
