//! Fusion-based refinement of thermal face images.
//!
//! The pipeline derives two inputs from the source (a gray-world white
//! balanced copy and its CLAHE-equalized version), computes four weight maps
//! per input (Laplacian contrast, local contrast, saliency, exposedness),
//! normalizes them across inputs and blends the inputs with a Laplacian
//! pyramid.

mod clahe;
mod fusion;
mod weights;
mod white_balance;

pub use clahe::clahe;
pub use fusion::fuse;
pub use weights::{
    exposedness_weight, laplacian_contrast_weight, local_contrast_weight, normalize_weights,
    saliency_weight, weight_maps, WeightMap,
};
pub use white_balance::{gray_world_gains, white_balance, GAIN_RANGE};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::pyramid::max_levels;

#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceConfig {
    /// CLAHE tile grid size along each axis.
    pub clahe_tiles: usize,
    /// Histogram clip limit as a fraction of tile pixels; 1.0 disables clipping.
    pub clahe_clip: f64,
    /// Requested pyramid depth, clamped to what the image size allows.
    pub fusion_levels: usize,
    pub exposedness_sigma: f64,
    pub normalization_epsilon: f64,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            clahe_tiles: 8,
            clahe_clip: 0.01,
            fusion_levels: 5,
            exposedness_sigma: 0.25,
            normalization_epsilon: 1e-9,
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clahe_tiles == 0 {
            return Err(Error::InvalidConfig("clahe_tiles must be positive"));
        }
        if !(self.clahe_clip > 0.0 && self.clahe_clip <= 1.0) {
            return Err(Error::InvalidConfig("clahe_clip must lie in (0, 1]"));
        }
        if self.fusion_levels == 0 {
            return Err(Error::InvalidConfig("fusion_levels must be positive"));
        }
        if !(self.exposedness_sigma > 0.0 && self.exposedness_sigma.is_finite()) {
            return Err(Error::InvalidConfig("exposedness_sigma must be positive"));
        }
        if !(self.normalization_epsilon > 0.0 && self.normalization_epsilon.is_finite()) {
            return Err(Error::InvalidConfig(
                "normalization_epsilon must be positive",
            ));
        }
        Ok(())
    }
}

/// Every intermediate of one [`enhance`] run, in pipeline order.
///
/// The weight maps are those of the CLAHE input, rescaled to `[0, 1]` for
/// display. Stage images of a single-channel source are single-channel.
#[derive(Debug, Clone)]
pub struct EnhanceStages {
    pub input: Image,
    pub white_balanced: Image,
    pub equalized: Image,
    pub laplacian_weight: Image,
    pub local_contrast_weight: Image,
    pub saliency_weight: Image,
    pub exposedness_weight: Image,
    pub output: Image,
}

impl EnhanceStages {
    /// Stage images with their `a`..`h` labels.
    pub fn labeled(&self) -> [(&'static str, &Image); 8] {
        [
            ("a_input", &self.input),
            ("b_white_balance", &self.white_balanced),
            ("c_clahe", &self.equalized),
            ("d_laplacian_weight", &self.laplacian_weight),
            ("e_local_contrast_weight", &self.local_contrast_weight),
            ("f_saliency_weight", &self.saliency_weight),
            ("g_exposedness_weight", &self.exposedness_weight),
            ("h_output", &self.output),
        ]
    }
}

/// Runs the whole refinement pipeline and keeps every stage.
pub fn enhance_stages(img: &Image, cfg: &EnhanceConfig) -> Result<EnhanceStages> {
    cfg.validate()?;
    let balanced = white_balance(img)?;
    let equalized = clahe(&balanced, cfg)?;
    let maps_balanced = weight_maps(&balanced, cfg.exposedness_sigma);
    let maps_equalized = weight_maps(&equalized, cfg.exposedness_sigma);
    let normalized = normalize_weights(
        &[maps_balanced, maps_equalized.clone()],
        cfg.normalization_epsilon,
    )?;
    let levels = cfg.fusion_levels.min(max_levels(img.width(), img.height()));
    let fused = fuse(&[balanced.clone(), equalized.clone()], &normalized, levels)?;

    let restore = |im: Image| {
        if img.channels() == 1 {
            im.channel(0)
        } else {
            im
        }
    };
    let [lap, local, sal, exp] = maps_equalized;
    Ok(EnhanceStages {
        input: img.clone(),
        white_balanced: restore(balanced),
        equalized: restore(equalized),
        laplacian_weight: lap.to_display_image(),
        local_contrast_weight: local.to_display_image(),
        saliency_weight: sal.to_display_image(),
        exposedness_weight: exp.to_display_image(),
        output: restore(fused),
    })
}

/// Refines `img`; the output has the same geometry and channel count.
pub fn enhance(img: &Image, cfg: &EnhanceConfig) -> Result<Image> {
    Ok(enhance_stages(img, cfg)?.output)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        EnhanceConfig::default().validate().unwrap();
        let bad = EnhanceConfig {
            clahe_clip: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = EnhanceConfig {
            clahe_clip: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mid_gray_is_a_fixed_point() {
        let img = Image::filled(64, 48, 1, 0.5).unwrap();
        let out = enhance(&img, &EnhanceConfig::default()).unwrap();
        assert_eq!(out.channels(), 1);
        for &v in out.data() {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn stages_are_labeled_a_to_h() {
        let img =
            Image::from_fn(40, 40, |x, y| 0.3 + 0.2 * (((x / 5) + (y / 7)) % 2) as f64).unwrap();
        let stages = enhance_stages(&img, &EnhanceConfig::default()).unwrap();
        let labels: alloc::vec::Vec<char> = stages
            .labeled()
            .iter()
            .map(|(l, _)| l.chars().next().unwrap())
            .collect();
        assert_eq!(labels, ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h']);
        for (_, im) in stages.labeled() {
            assert!(im.same_dims(&img));
            assert!(im.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
