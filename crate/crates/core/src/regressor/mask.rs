//! The loss weight mask and the UV layout it shares with the synthetic data.
//!
//! UV texel `(u, v)` of an `r × r` map sits at face coordinates
//! `s = ((2u + 1) / r − 1) / FACE_RADIUS` (and `t` likewise from `v`, pointing
//! down); the face is the unit disk `s² + t² ≤ 1`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::posmap::WeightMask;

/// Radius of the face disk in normalized UV units.
pub const FACE_RADIUS: f64 = 0.9;
/// Resolution of the bundled mask.
pub const MASK_RESOLUTION: usize = 256;

pub const WEIGHT_OUTSIDE: f64 = 0.0;
pub const WEIGHT_FACE: f64 = 3.0;
pub const WEIGHT_FEATURES: f64 = 4.0;
pub const WEIGHT_LANDMARK: f64 = 16.0;

static BUNDLED_MASK: &[u8] = include_bytes!("../../assets/weight_mask_256.pgm");

/// Face coordinates of texel index `i` on an `r`-texel axis.
pub fn uv_to_face(i: usize, r: usize) -> f64 {
    ((2 * i + 1) as f64 / r as f64 - 1.0) / FACE_RADIUS
}

fn face_to_uv(s: f64, r: usize) -> usize {
    let u = libm::round((s * FACE_RADIUS + 1.0) * r as f64 / 2.0 - 0.5);
    u.clamp(0.0, (r - 1) as f64) as usize
}

fn in_ellipse(s: f64, t: f64, cs: f64, ct: f64, rs: f64, rt: f64) -> bool {
    let (a, b) = ((s - cs) / rs, (t - ct) / rt);
    a * a + b * b <= 1.0
}

fn ring(out: &mut Vec<(f64, f64)>, n: usize, cs: f64, ct: f64, rs: f64, rt: f64) {
    for i in 0..n {
        let a = core::f64::consts::TAU * i as f64 / n as f64;
        out.push((cs + rs * libm::cos(a), ct + rt * libm::sin(a)));
    }
}

/// The 68 landmark positions in face coordinates: jaw (17), brows (10),
/// nose (9), eyes (12), mouth (20).
pub fn landmarks() -> Vec<(f64, f64)> {
    let mut p = Vec::with_capacity(68);
    for i in 0..17 {
        let a = -0.15 + (core::f64::consts::PI + 0.3) * i as f64 / 16.0;
        p.push((-0.92 * libm::cos(a), 0.92 * libm::sin(a)));
    }
    for side in [-1.0, 1.0] {
        for i in 0..5 {
            let s = 0.15 + 0.45 * i as f64 / 4.0;
            let arch = 0.05 * libm::sin(core::f64::consts::PI * i as f64 / 4.0);
            p.push((side * s, -0.45 - arch));
        }
    }
    for i in 0..4 {
        p.push((0.0, -0.3 + 0.35 * i as f64 / 3.0));
    }
    for i in 0..5 {
        p.push((-0.16 + 0.08 * i as f64, 0.15));
    }
    for side in [-1.0, 1.0] {
        ring(&mut p, 6, side * 0.38, -0.25, 0.14, 0.07);
    }
    ring(&mut p, 12, 0.0, 0.5, 0.3, 0.12);
    ring(&mut p, 8, 0.0, 0.5, 0.18, 0.05);
    p
}

/// Builds the four-level mask at any resolution: 16 at landmark texels, 4
/// over the eyes, nose and mouth, 3 on the rest of the face disk, 0 outside.
pub fn procedural_weight_mask(resolution: usize) -> Result<WeightMask> {
    if resolution == 0 {
        return Err(Error::ZeroOutputSize);
    }
    let r = resolution;
    let mut data = Vec::with_capacity(r * r);
    for v in 0..r {
        let t = uv_to_face(v, r);
        for u in 0..r {
            let s = uv_to_face(u, r);
            let w = if s * s + t * t > 1.0 {
                WEIGHT_OUTSIDE
            } else if in_ellipse(s, t, -0.38, -0.25, 0.2, 0.12)
                || in_ellipse(s, t, 0.38, -0.25, 0.2, 0.12)
                || (s.abs() <= 0.15 && (-0.3..=0.2).contains(&t))
                || in_ellipse(s, t, 0.0, 0.5, 0.36, 0.17)
            {
                WEIGHT_FEATURES
            } else {
                WEIGHT_FACE
            };
            data.push(w);
        }
    }
    for (s, t) in landmarks() {
        data[face_to_uv(t, r) * r + face_to_uv(s, r)] = WEIGHT_LANDMARK;
    }
    WeightMask::new(r, r, data)
}

/// Parses the bundled binary PGM, whose sample values are the weights.
fn bundled() -> Result<WeightMask> {
    let bad = Error::InvalidConfig("bundled weight mask is malformed");
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < BUNDLED_MASK.len() && BUNDLED_MASK[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < BUNDLED_MASK.len() && !BUNDLED_MASK[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad);
        }
        fields.push(&BUNDLED_MASK[start..pos]);
    }
    let num = |f: &[u8]| {
        core::str::from_utf8(f)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
    };
    let (w, h) = (
        num(fields[1]).ok_or(bad.clone())?,
        num(fields[2]).ok_or(bad.clone())?,
    );
    if fields[0] != b"P5" || w != MASK_RESOLUTION || h != MASK_RESOLUTION {
        return Err(bad);
    }
    let body = &BUNDLED_MASK[pos + 1..];
    if body.len() != w * h {
        return Err(bad);
    }
    WeightMask::new(w, h, body.iter().map(|&b| b as f64).collect())
}

/// The bundled mask, resampled by nearest neighbour when `resolution`
/// differs from [`MASK_RESOLUTION`].
pub fn default_weight_mask(resolution: usize) -> Result<WeightMask> {
    let m = bundled()?;
    if resolution == MASK_RESOLUTION {
        Ok(m)
    } else {
        m.resample_nearest(resolution, resolution)
    }
}
