//! Deterministic synthetic image sets: a pristine corpus for fitting the
//! quality models and degraded thermal faces for the before/after report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermoface_core::enhance::{enhance, EnhanceConfig};
use thermoface_core::filter::{convolve, gaussian_taps, Kernel};
use thermoface_core::regressor::FaceParams;
use thermoface_core::{Image, Result};

/// Side of every generated image.
pub const CORPUS_SIDE: usize = 384;
/// Images in the pristine corpus; the 36-dimensional whole-image model needs
/// at least 38.
pub const PRISTINE_COUNT: usize = 40;
pub const PAIR_COUNT: usize = 3;

/// Standard deviation of the additive Gaussian sensor noise.
pub const SENSOR_NOISE: f64 = 0.01;

const PRISTINE_SEED: u64 = 0x7072_6973;
const PAIR_SEED: u64 = 0x7061_6972;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one of the pair is enough here
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Rounds to the 8-bit grid every stored image lives on.
pub fn quantize(img: &Image) -> Image {
    img.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() / 255.0)
}

/// Sum of bilinearly upsampled random grids, each octave half as strong as
/// the previous finer one is wide. Zero mean, roughly unit range.
fn fractal_noise(rng: &mut ChaCha8Rng, side: usize, coarsest: usize, octaves: usize) -> Vec<f64> {
    let mut out = vec![0.0; side * side];
    let mut cells = coarsest;
    let mut amp = 1.0;
    for _ in 0..octaves {
        let grid =
            Image::from_fn(cells, cells, |_, _| rng.random::<f64>() - 0.5).expect("nonzero grid");
        let up = grid.resize_bilinear(side, side).expect("nonzero side");
        for (o, v) in out.iter_mut().zip(up.data()) {
            *o += amp * v;
        }
        cells = (cells * 2).min(side);
        amp *= 0.6;
    }
    out
}

/// A frontal thermal-looking face on a cluttered background, full contrast.
pub fn thermal_face(seed: u64) -> Image {
    let side = CORPUS_SIDE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let face = FaceParams::random(side, seed);
    let base = face.render(side).expect("nonzero side");
    let clutter = fractal_noise(&mut rng, side, 4, 6);
    let skin = fractal_noise(&mut rng, side, 48, 3);
    let strength = rng.random_range(0.15..0.3);
    let data = base
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let on_face = v > 0.3;
            let tex = if on_face {
                0.05 * skin[i]
            } else {
                strength * clutter[i]
            };
            (v + tex + SENSOR_NOISE * normal(&mut rng)).clamp(0.0, 1.0)
        })
        .collect();
    Image::from_planar(side, side, 1, data).expect("valid geometry")
}

/// Cluttered natural-ish texture without a face.
fn scene(seed: u64) -> Image {
    let side = CORPUS_SIDE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coarse = rng.random_range(2..8);
    let a = fractal_noise(&mut rng, side, coarse, 7);
    let gain = rng.random_range(0.6..1.2);
    let data = a
        .iter()
        .map(|v| (0.5 + gain * v + SENSOR_NOISE * normal(&mut rng)).clamp(0.0, 1.0))
        .collect();
    Image::from_planar(side, side, 1, data).expect("valid geometry")
}

/// Clean images: alternating faces and face-free scenes.
pub fn pristine_corpus() -> Vec<Image> {
    (0..PRISTINE_COUNT as u64)
        .map(|i| {
            let seed = PRISTINE_SEED + i;
            if i % 2 == 0 {
                quantize(&thermal_face(seed))
            } else {
                quantize(&scene(seed))
            }
        })
        .collect()
}

/// A washed-out copy: contrast squeezed towards a haze level, an optional
/// Gaussian blur and 8-bit quantization. The scene's own sensor noise is
/// squeezed along with it.
pub fn degrade(img: &Image, contrast: f64, haze: f64, blur_sigma: f64) -> Result<Image> {
    let squeezed = img.map(|v| haze + contrast * (v - haze));
    if blur_sigma <= 0.0 {
        return Ok(quantize(&squeezed));
    }
    let taps = gaussian_taps(2 * (3.0 * blur_sigma).ceil() as usize + 1, blur_sigma);
    Ok(quantize(&convolve(&squeezed, &Kernel::separable(&taps)?)?))
}

/// One named pair of the before/after corpus.
#[derive(Debug, Clone)]
pub struct Pair {
    pub name: String,
    pub original: Image,
    pub processed: Image,
}

/// Degraded thermal faces and their enhanced versions.
pub fn degraded_pairs() -> Result<Vec<Pair>> {
    let settings = [(0.3, 0.55, 0.0), (0.25, 0.4, 0.5), (0.35, 0.6, 0.0)];
    settings
        .iter()
        .enumerate()
        .map(|(i, &(contrast, haze, blur))| {
            let seed = PAIR_SEED + i as u64;
            let original = degrade(&thermal_face(seed), contrast, haze, blur)?;
            let processed = quantize(&enhance(&original, &EnhanceConfig::default())?);
            Ok(Pair {
                name: format!("face{}", i + 1),
                original,
                processed,
            })
        })
        .collect()
}
