use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermoface_core::enhance::*;
use thermoface_core::filter::{convolve, Kernel, BINOMIAL5};
use thermoface_core::pyramid::*;
use thermoface_core::Image;

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> Image {
    let data = (0..w * h * c).map(|_| rng.random::<f64>()).collect();
    Image::from_planar(w, h, c, data).unwrap()
}

fn max_abs_diff(a: &Image, b: &Image) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn build(w: usize, h: usize, ch: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Image {
    let planes: Vec<Image> = (0..ch)
        .map(|c| Image::from_fn(w, h, |x, y| f(x, y, c)).unwrap())
        .collect();
    Image::from_planes(&planes).unwrap()
}

fn clamp_idx(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// 2-D correlation with clamped indices, one multiply per tap.
fn brute_correlate(img: &Image, kw: usize, kh: usize, taps: &[f64]) -> Image {
    let (w, h) = (img.width(), img.height());
    let (rx, ry) = ((kw / 2) as isize, (kh / 2) as isize);
    let mut out = Vec::new();
    for c in 0..img.channels() {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for ky in 0..kh {
                    for kx in 0..kw {
                        let sx = clamp_idx(x as isize + kx as isize - rx, w);
                        let sy = clamp_idx(y as isize + ky as isize - ry, h);
                        acc += taps[ky * kw + kx] * img.get(sx, sy, c);
                    }
                }
                out.push(acc);
            }
        }
    }
    Image::from_planar(w, h, img.channels(), out).unwrap()
}

fn outer(t: &[f64]) -> Vec<f64> {
    t.iter()
        .flat_map(|a| t.iter().map(move |b| a * b))
        .collect()
}

fn oracle_down(img: &Image) -> Image {
    let blurred = brute_correlate(img, 5, 5, &outer(&BINOMIAL5));
    let (w, h) = (img.width().div_ceil(2), img.height().div_ceil(2));
    build(w, h, img.channels(), |x, y, c| blurred.get(2 * x, 2 * y, c))
}

/// Zero insertion onto a grid whose even positions beyond the source repeat
/// the edge sample, then a 2-D blur with gain 4.
fn oracle_up(img: &Image, tw: usize, th: usize) -> Image {
    let k = outer(&BINOMIAL5);
    build(tw, th, img.channels(), |x, y, c| {
        let mut acc = 0.0;
        for ky in 0..5 {
            for kx in 0..5 {
                let px = x as isize + kx as isize - 2;
                let py = y as isize + ky as isize - 2;
                if px.rem_euclid(2) == 0 && py.rem_euclid(2) == 0 {
                    let sx = clamp_idx(px.div_euclid(2), img.width());
                    let sy = clamp_idx(py.div_euclid(2), img.height());
                    acc += 4.0 * k[ky * 5 + kx] * img.get(sx, sy, c);
                }
            }
        }
        acc
    })
}

fn oracle_fuse(inputs: &[Image], weights: &[WeightMap], levels: usize) -> Image {
    let (w, h, ch) = (inputs[0].width(), inputs[0].height(), inputs[0].channels());
    let mut fused: Vec<Image> = Vec::new();
    for (img, wm) in inputs.iter().zip(weights) {
        let mut gi = vec![img.clone()];
        let mut gw = vec![wm.as_image()];
        for l in 1..levels {
            gi.push(oracle_down(&gi[l - 1]));
            gw.push(oracle_down(&gw[l - 1]));
        }
        for l in 0..levels {
            let detail = if l + 1 < levels {
                let up = oracle_up(&gi[l + 1], gi[l].width(), gi[l].height());
                build(gi[l].width(), gi[l].height(), ch, |x, y, c| {
                    gi[l].get(x, y, c) - up.get(x, y, c)
                })
            } else {
                gi[l].clone()
            };
            let term = build(detail.width(), detail.height(), ch, |x, y, c| {
                gw[l].get(x, y, 0) * detail.get(x, y, c)
            });
            if fused.len() <= l {
                fused.push(term);
            } else {
                let acc = &fused[l];
                fused[l] = build(acc.width(), acc.height(), ch, |x, y, c| {
                    acc.get(x, y, c) + term.get(x, y, c)
                });
            }
        }
    }
    let mut acc = fused.pop().unwrap();
    while let Some(detail) = fused.pop() {
        let up = oracle_up(&acc, detail.width(), detail.height());
        acc = build(detail.width(), detail.height(), ch, |x, y, c| {
            detail.get(x, y, c) + up.get(x, y, c)
        });
    }
    assert_eq!((acc.width(), acc.height()), (w, h));
    acc.clamp01()
}

#[test]
fn convolve_matches_brute_force_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (w, h) in [(1, 1), (4, 4), (8, 3), (5, 8)] {
        let img = random_image(&mut rng, w, h, 3);
        let taps: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let grid = Kernel::grid(3, 3, &taps).unwrap();
        assert_eq!(
            convolve(&img, &grid).unwrap(),
            brute_correlate(&img, 3, 3, &taps)
        );
    }
    // separable binomial on a 4x4 ramp: two 1-D passes against one 2-D pass
    let ramp = build(4, 4, 1, |x, y, _| (x + 4 * y) as f64 / 15.0);
    let got = convolve(&ramp, &Kernel::binomial5()).unwrap();
    let want = brute_correlate(&ramp, 5, 5, &outer(&BINOMIAL5));
    // sixteenths and ramp values are exact binary fractions only up to rounding
    assert!(max_abs_diff(&got, &want) < 1e-15);
}

#[test]
fn pyramid_steps_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (w, h) in [(6, 6), (7, 5), (16, 9)] {
        let img = random_image(&mut rng, w, h, 1);
        assert!(max_abs_diff(&downsample2(&img), &oracle_down(&img)) < 1e-14);
        for (tw, th) in [(2 * w, 2 * h), (2 * w - 1, 2 * h - 1)] {
            let up = upsample2(&img, tw, th).unwrap();
            assert!(max_abs_diff(&up, &oracle_up(&img, tw, th)) < 1e-14);
        }
        assert!(upsample2(&img, 2 * w + 1, 2 * h).is_err());
    }
}

#[test]
fn fusion_matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for channels in [1, 3] {
        let a = random_image(&mut rng, 16, 16, channels);
        let b = random_image(&mut rng, 16, 16, channels);
        let wa: Vec<f64> = (0..256).map(|_| rng.random::<f64>()).collect();
        let wb: Vec<f64> = wa.iter().map(|v| 1.0 - v).collect();
        let weights = [
            WeightMap::new(16, 16, wa).unwrap(),
            WeightMap::new(16, 16, wb).unwrap(),
        ];
        let inputs = [a, b];
        for levels in 1..=4 {
            let got = fuse(&inputs, &weights, levels).unwrap();
            let want = oracle_fuse(&inputs, &weights, levels);
            assert!(max_abs_diff(&got, &want) < 1e-6);
        }
    }
}

#[test]
fn white_balance_gains() {
    // channel means 0.2, 0.4, 0.4: luminance mean 0.3402, red gain 1.701
    let img = Image::from_planar(2, 1, 3, vec![0.1, 0.3, 0.4, 0.4, 0.4, 0.4]).unwrap();
    let g = gray_world_gains(&img).unwrap();
    let lum = 0.299 * 0.2 + 0.587 * 0.4 + 0.114 * 0.4;
    assert!((g[0] - lum / 0.2).abs() < 1e-12);
    assert!((g[1] - lum / 0.4).abs() < 1e-12);
    let out = white_balance(&img).unwrap();
    assert!((out.get(1, 0, 0) - 0.3 * lum / 0.2).abs() < 1e-12);

    // a dim red channel hits the upper clamp
    let dim = Image::from_planar(1, 1, 3, vec![0.05, 0.5, 0.5]).unwrap();
    assert_eq!(gray_world_gains(&dim).unwrap()[0], GAIN_RANGE.1);

    let gray = Image::filled(3, 3, 3, 0.25).unwrap();
    assert_eq!(white_balance(&gray).unwrap(), gray);
    assert!(white_balance(&Image::filled(2, 2, 3, 0.0).unwrap()).is_err());
}

#[test]
fn clahe_bounds_on_low_contrast_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = EnhanceConfig {
        clahe_tiles: 4,
        clahe_clip: 1.0,
        ..EnhanceConfig::default()
    };
    for _ in 0..10 {
        let lo = rng.random_range(0.2..0.6);
        let img = build(64, 48, 1, |_, _, _| lo + 0.1 * rng.random::<f64>());
        let out = clahe(&img, &cfg).unwrap();
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        // a narrow histogram is stretched across most of the range
        let (min, max) = out
            .data()
            .iter()
            .fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(max - min > 0.5);
    }
}

#[test]
fn enhance_is_deterministic_and_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let img = build(40, 36, 1, |x, y, _| {
        0.3 + 0.2 * ((x * y) as f64 / 1440.0) + 0.05 * rng.random::<f64>()
    });
    let cfg = EnhanceConfig::default();
    let a = enhance(&img, &cfg).unwrap();
    assert_eq!(a, enhance(&img, &cfg).unwrap());
    assert!(a.data().iter().all(|v| (0.0..=1.0).contains(v)));
    let mid = Image::filled(32, 32, 1, 0.5).unwrap();
    let out = enhance(&mid, &cfg).unwrap();
    assert!(out.data().iter().all(|v| (v - 0.5).abs() < 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn laplacian_round_trip(seed in any::<u64>(), w in 16usize..=128, h in 16usize..=128,
                            three in any::<bool>(), level_pick in 0usize..64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = random_image(&mut rng, w, h, if three { 3 } else { 1 });
        let levels = 1 + level_pick % max_levels(w, h);
        let back = collapse_laplacian(&laplacian_pyramid(&img, levels).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&back, &img) < 1e-6);
    }

    #[test]
    fn normalized_weights_sum_to_one(seed in any::<u64>(), inputs in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let maps: Vec<[WeightMap; 4]> = (0..inputs)
            .map(|_| weight_maps(&random_image(&mut rng, 24, 20, 3), 0.25))
            .collect();
        let norm = normalize_weights(&maps, 1e-9).unwrap();
        for i in 0..24 * 20 {
            let s: f64 = norm.iter().map(|m| m.data()[i]).sum();
            prop_assert!((s - 1.0).abs() < 1e-6);
        }
        for m in maps.iter().flatten() {
            prop_assert!(m.data().iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn fusing_identical_inputs_is_identity(seed in any::<u64>(), levels in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = random_image(&mut rng, 64, 64, 3);
        let raw: Vec<f64> = (0..64 * 64).map(|_| rng.random::<f64>()).collect();
        let a = WeightMap::new(64, 64, raw.clone()).unwrap();
        let b = WeightMap::new(64, 64, raw.iter().map(|v| 1.0 - v).collect()).unwrap();
        let out = fuse(&[img.clone(), img.clone()], &[a, b], levels).unwrap();
        prop_assert!(max_abs_diff(&out, &img) < 1e-6);
    }

    #[test]
    fn convolution_preserves_constants(c in 0.0f64..1.0, taps in prop::collection::vec(0.01f64..1.0, 1..4)) {
        let mut t = taps.clone();
        t.extend(taps.iter().rev().skip(1));
        let s: f64 = t.iter().sum();
        let t: Vec<f64> = t.iter().map(|v| v / s).collect();
        let img = Image::filled(9, 7, 1, c).unwrap();
        let out = convolve(&img, &Kernel::separable(&t).unwrap()).unwrap();
        // equal up to the rounding of Σ t·c
        prop_assert!(out.data().iter().all(|v| (v - c).abs() <= 4.0 * f64::EPSILON));
    }
}
