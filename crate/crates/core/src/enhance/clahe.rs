//! Contrast-limited adaptive histogram equalization on luminance.

use alloc::vec;
use alloc::vec::Vec;

use super::EnhanceConfig;
use crate::error::{Error, Result};
use crate::image::{to_luminance, Image};

const BINS: usize = 256;
/// Luminance below this is treated as black when transferring the new
/// luminance back onto color channels.
const CHROMA_GUARD: f64 = 1e-6;

#[inline]
fn bin_of(v: f64) -> usize {
    libm::round(v * 255.0).clamp(0.0, 255.0) as usize
}

/// Per-tile intensity mapping.
#[derive(Debug, Clone)]
enum TileMap {
    /// A tile with a single occupied level keeps its values.
    Identity,
    Lut(Vec<f64>),
}

impl TileMap {
    #[inline]
    fn apply(&self, v: f64) -> f64 {
        match self {
            TileMap::Identity => v,
            TileMap::Lut(lut) => lut[bin_of(v)],
        }
    }
}

fn tile_map(
    lum: &[f64],
    w: usize,
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
    clip: f64,
) -> TileMap {
    let mut hist = [0.0f64; BINS];
    for y in y0..y1 {
        for &v in &lum[y * w + x0..y * w + x1] {
            hist[bin_of(v)] += 1.0;
        }
    }
    if hist.iter().filter(|&&h| h > 0.0).count() <= 1 {
        return TileMap::Identity;
    }
    let n = ((x1 - x0) * (y1 - y0)) as f64;
    if clip < 1.0 {
        let limit = clip * n;
        let mut excess = 0.0;
        for h in hist.iter_mut() {
            if *h > limit {
                excess += *h - limit;
                *h = limit;
            }
        }
        let share = excess / BINS as f64;
        for h in hist.iter_mut() {
            *h += share;
        }
    }
    let mut lut = vec![0.0; BINS];
    let mut cum = 0.0;
    for (l, h) in lut.iter_mut().zip(hist.iter()) {
        cum += h;
        *l = (cum / n).min(1.0);
    }
    TileMap::Lut(lut)
}

/// Tile boundaries `[b_0, b_1, ..., b_n]` splitting `len` into `n` nearly
/// equal spans.
fn boundaries(len: usize, n: usize) -> Vec<usize> {
    (0..=n).map(|i| i * len / n).collect()
}

/// Index of the lower neighbouring tile center and the interpolation weight
/// toward the next one.
fn neighbours(pos: usize, centers: &[f64]) -> (usize, usize, f64) {
    let p = pos as f64;
    let last = centers.len() - 1;
    if p <= centers[0] {
        return (0, 0, 0.0);
    }
    if p >= centers[last] {
        return (last, last, 0.0);
    }
    let i = centers
        .iter()
        .rposition(|&c| c <= p)
        .unwrap_or(0)
        .min(last - 1);
    let t = (p - centers[i]) / (centers[i + 1] - centers[i]);
    (i, i + 1, t)
}

/// Equalizes the luminance of `img` tile by tile and maps every pixel through
/// a bilinear blend of the four nearest tile mappings. Color images keep their
/// channel ratios.
pub fn clahe(img: &Image, cfg: &EnhanceConfig) -> Result<Image> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    let tiles = cfg.clahe_tiles;
    if w / tiles < 2 || h / tiles < 2 {
        return Err(Error::TileTooSmall {
            tile_width: w / tiles,
            tile_height: h / tiles,
        });
    }
    let lum_img = to_luminance(img);
    let lum = lum_img.data();
    let bx = boundaries(w, tiles);
    let by = boundaries(h, tiles);
    let mut maps = Vec::with_capacity(tiles * tiles);
    for ty in 0..tiles {
        for tx in 0..tiles {
            maps.push(tile_map(
                lum,
                w,
                bx[tx],
                bx[tx + 1],
                by[ty],
                by[ty + 1],
                cfg.clahe_clip,
            ));
        }
    }
    let centers = |b: &[usize]| -> Vec<f64> {
        b.windows(2)
            .map(|s| (s[0] + s[1] - 1) as f64 / 2.0)
            .collect()
    };
    let cx = centers(&bx);
    let cy = centers(&by);
    let col_neighbours: Vec<_> = (0..w).map(|x| neighbours(x, &cx)).collect();

    let mut new_lum = vec![0.0; w * h];
    for y in 0..h {
        let (ty0, ty1, fy) = neighbours(y, &cy);
        for x in 0..w {
            let (tx0, tx1, fx) = col_neighbours[x];
            let v = lum[y * w + x];
            let m = |ty: usize, tx: usize| maps[ty * tiles + tx].apply(v);
            let top = m(ty0, tx0) * (1.0 - fx) + m(ty0, tx1) * fx;
            let bottom = m(ty1, tx0) * (1.0 - fx) + m(ty1, tx1) * fx;
            let mapped = if fy == 0.0 {
                top
            } else {
                top * (1.0 - fy) + bottom * fy
            };
            new_lum[y * w + x] = mapped.clamp(0.0, 1.0);
        }
    }

    if img.channels() == 1 {
        return Image::from_planar(w, h, 1, new_lum);
    }
    let mut data = Vec::with_capacity(img.data().len());
    for c in 0..img.channels() {
        let plane = img.plane(c);
        data.extend(plane.iter().enumerate().map(|(i, &v)| {
            let old = lum[i];
            if old < CHROMA_GUARD {
                new_lum[i]
            } else {
                (v * (new_lum[i] / old)).clamp(0.0, 1.0)
            }
        }));
    }
    Image::from_planar(w, h, img.channels(), data)
}
