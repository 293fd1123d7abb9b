//! Synthetic training pairs: ellipsoidal "faces" rendered as thermal-looking
//! images together with their exact position maps.

use alloc::vec::Vec;

use super::mask::uv_to_face;
use super::train::Sample;
use crate::error::Result;
use crate::image::Image;
use crate::posmap::PositionMap;
use crate::rng::{seeded, uniform};

/// Shape of one synthetic face, in pixels of a `size × size` image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceParams {
    pub center_x: f64,
    pub center_y: f64,
    pub radius_x: f64,
    pub radius_y: f64,
    /// Height of the ellipsoid's apex above the face plane.
    pub depth: f64,
}

impl FaceParams {
    pub fn random(size: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let s = size as f64;
        Self {
            center_x: s / 2.0 + uniform(&mut rng, -s / 16.0, s / 16.0),
            center_y: s / 2.0 + uniform(&mut rng, -s / 16.0, s / 16.0),
            radius_x: s * uniform(&mut rng, 0.30, 0.38),
            radius_y: s * uniform(&mut rng, 0.36, 0.44),
            depth: s * uniform(&mut rng, 0.20, 0.30),
        }
    }

    /// Relative height in `[0, ~1.25]` at face coordinates `(s, t)`: an
    /// ellipsoid cap plus a nose ridge, zero off the face.
    fn height(s: f64, t: f64) -> f64 {
        let r2 = s * s + t * t;
        if r2 >= 1.0 {
            return 0.0;
        }
        let nose = 0.25 * libm::exp(-(s * s / 0.02 + (t - 0.05) * (t - 0.05) / 0.05));
        libm::sqrt(1.0 - r2) * (1.0 + nose)
    }

    /// Ground-truth position map at resolution `resolution`.
    pub fn position_map(&self, resolution: usize) -> Result<PositionMap> {
        PositionMap::from_fn(resolution, resolution, |u, v| {
            let (s, t) = (uv_to_face(u, resolution), uv_to_face(v, resolution));
            [
                self.center_x + self.radius_x * s,
                self.center_y + self.radius_y * t,
                self.depth * Self::height(s, t),
            ]
        })
    }

    /// Single-channel rendering: a warm face whose temperature follows its
    /// height, warm eye corners and mouth, a cool nose tip and a dim
    /// background with a gentle gradient.
    pub fn render(&self, size: usize) -> Result<Image> {
        Image::from_fn(size, size, |x, y| {
            let s = (x as f64 - self.center_x) / self.radius_x;
            let t = (y as f64 - self.center_y) / self.radius_y;
            let r = libm::sqrt(s * s + t * t);
            let background = 0.1 + 0.05 * x as f64 / size as f64;
            let blob = |cs: f64, ct: f64, w: f64| {
                libm::exp(-((s - cs) * (s - cs) + (t - ct) * (t - ct)) / w)
            };
            let face = 0.35
                + 0.35 * Self::height(s, t)
                + 0.15 * (blob(-0.38, -0.25, 0.01) + blob(0.38, -0.25, 0.01))
                + 0.08 * blob(0.0, 0.5, 0.015)
                - 0.12 * blob(0.0, 0.1, 0.01);
            // soft silhouette over r in [0.95, 1.05]
            let a = ((1.05 - r) / 0.1).clamp(0.0, 1.0);
            (background + a * (face - background)).clamp(0.0, 1.0)
        })
    }
}

/// One rendered face and its position map, both at `size`.
pub fn synthetic_sample(size: usize, seed: u64) -> Result<Sample> {
    let p = FaceParams::random(size, seed);
    Ok(Sample {
        image: p.render(size)?,
        target: p.position_map(size)?,
    })
}

/// `count` samples with seeds `seed, seed + 1, ...`.
pub fn synthetic_dataset(size: usize, count: usize, seed: u64) -> Result<Vec<Sample>> {
    (0..count as u64)
        .map(|i| synthetic_sample(size, seed.wrapping_add(i)))
        .collect()
}
