//! Moment-matching fits of generalized Gaussian distributions.

use super::gamma::gamma;
use crate::error::{Error, Result};

/// Shape search grid: `[SHAPE_MIN, SHAPE_MAX]` in steps of `SHAPE_STEP`.
pub const SHAPE_MIN: f64 = 0.2;
pub const SHAPE_MAX: f64 = 10.0;
pub const SHAPE_STEP: f64 = 0.001;
const GRID_LEN: usize = 9_801;

/// Minimum sample count accepted by the public fitting functions.
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgdParams {
    pub shape: f64,
    /// Standard deviation, `sqrt(E[x²])`.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggdParams {
    pub shape: f64,
    pub left_scale: f64,
    pub right_scale: f64,
    pub mean: f64,
}

/// `Γ(2/β)² / (Γ(1/β) Γ(3/β))`, the value of `E[|x|]² / E[x²]` for a GGD of
/// shape `β`. Increasing in `β`.
pub fn ggd_moment_ratio(shape: f64) -> f64 {
    let g2 = gamma(2.0 / shape);
    g2 * g2 / (gamma(1.0 / shape) * gamma(3.0 / shape))
}

#[inline]
fn grid_shape(i: usize) -> f64 {
    SHAPE_MIN + i as f64 * SHAPE_STEP
}

/// Grid shape whose moment ratio is nearest `target`. The ratio is monotone
/// on the grid, so a bisection finds the same point a full scan would.
pub fn solve_shape(target: f64) -> f64 {
    let (mut lo, mut hi) = (0usize, GRID_LEN - 1);
    if target <= ggd_moment_ratio(grid_shape(lo)) {
        return grid_shape(lo);
    }
    if target >= ggd_moment_ratio(grid_shape(hi)) {
        return grid_shape(hi);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ggd_moment_ratio(grid_shape(mid)) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dl = (target - ggd_moment_ratio(grid_shape(lo))).abs();
    let dh = (ggd_moment_ratio(grid_shape(hi)) - target).abs();
    if dh < dl {
        grid_shape(hi)
    } else {
        grid_shape(lo)
    }
}

pub(crate) struct Moments {
    pub abs_mean: f64,
    pub second: f64,
}

pub(crate) fn moments(samples: &[f64]) -> Moments {
    let n = samples.len() as f64;
    let (mut a, mut s) = (0.0, 0.0);
    for &x in samples {
        a += x.abs();
        s += x * x;
    }
    Moments {
        abs_mean: a / n,
        second: s / n,
    }
}

fn ensure_count(samples: &[f64]) -> Result<()> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            actual: samples.len(),
        });
    }
    Ok(())
}

/// Zero-mean GGD fit by matching `E[|x|]² / E[x²]`.
pub fn fit_ggd(samples: &[f64]) -> Result<GgdParams> {
    ensure_count(samples)?;
    if samples.iter().all(|&x| x == samples[0]) {
        return Err(Error::DegenerateSamples("zero variance"));
    }
    fit_ggd_unchecked(samples).ok_or(Error::DegenerateSamples("zero variance"))
}

pub(crate) fn fit_ggd_unchecked(samples: &[f64]) -> Option<GgdParams> {
    if samples.is_empty() {
        return None;
    }
    let m = moments(samples);
    if !(m.second.is_finite() && m.second > 0.0) {
        return None;
    }
    Some(GgdParams {
        shape: solve_shape(m.abs_mean * m.abs_mean / m.second),
        scale: libm::sqrt(m.second),
    })
}

/// Side scales `sqrt(E[x² | x < 0])` and `sqrt(E[x² | x > 0])`; zero when a
/// side has no samples.
pub(crate) fn side_scales(samples: &[f64]) -> (f64, f64, usize, usize) {
    let (mut ls, mut ln, mut rs, mut rn) = (0.0, 0usize, 0.0, 0usize);
    for &x in samples {
        if x < 0.0 {
            ls += x * x;
            ln += 1;
        } else if x > 0.0 {
            rs += x * x;
            rn += 1;
        }
    }
    let l = if ln > 0 {
        libm::sqrt(ls / ln as f64)
    } else {
        0.0
    };
    let r = if rn > 0 {
        libm::sqrt(rs / rn as f64)
    } else {
        0.0
    };
    (l, r, ln, rn)
}

fn aggd_from_scales(samples: &[f64], left: f64, right: f64) -> AggdParams {
    let m = moments(samples);
    let r_hat = m.abs_mean * m.abs_mean / m.second;
    // the correction is symmetric under gamma -> 1/gamma, so the smaller
    // ratio is used to stay finite when one side is empty
    let g = if left <= right {
        left / right
    } else {
        right / left
    };
    let big_r = r_hat * (g * g * g + 1.0) * (g + 1.0) / ((g * g + 1.0) * (g * g + 1.0));
    let shape = solve_shape(big_r);
    let mean = (right - left)
        * (gamma(2.0 / shape) / gamma(1.0 / shape))
        * libm::sqrt(gamma(1.0 / shape) / gamma(3.0 / shape));
    AggdParams {
        shape,
        left_scale: left,
        right_scale: right,
        mean,
    }
}

/// Asymmetric GGD fit from the left/right partial second moments.
pub fn fit_aggd(samples: &[f64]) -> Result<AggdParams> {
    ensure_count(samples)?;
    let (left, right, ln, rn) = side_scales(samples);
    if ln == 0 || rn == 0 {
        return Err(Error::DegenerateSamples(
            "one side of the distribution is empty",
        ));
    }
    if !(left > 0.0 && right > 0.0) {
        return Err(Error::DegenerateSamples("zero variance on one side"));
    }
    Ok(aggd_from_scales(samples, left, right))
}

/// Total variant used inside feature extraction: a one-sided sample still
/// gets a shape, and all-zero samples give `None`.
pub(crate) fn fit_aggd_lenient(samples: &[f64]) -> Option<AggdParams> {
    let (left, right, _, _) = side_scales(samples);
    if !(left > 0.0 || right > 0.0) {
        return None;
    }
    Some(aggd_from_scales(samples, left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn moment_ratio_landmarks() {
        assert!((ggd_moment_ratio(1.0) - 0.5).abs() < 1e-13);
        assert!((ggd_moment_ratio(2.0) - 2.0 / core::f64::consts::PI).abs() < 1e-13);
        let mut prev = 0.0;
        for i in (0..GRID_LEN).step_by(37) {
            let r = ggd_moment_ratio(grid_shape(i));
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn bisection_matches_scan() {
        for target in [
            0.05,
            0.3,
            0.5,
            0.5001,
            0.6,
            2.0 / core::f64::consts::PI,
            0.7,
            0.74,
            0.9,
        ] {
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..GRID_LEN {
                let d = (ggd_moment_ratio(grid_shape(i)) - target).abs();
                if d < best.0 {
                    best = (d, grid_shape(i));
                }
            }
            assert_eq!(solve_shape(target), best.1, "target {target}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(
            fit_ggd(&[0.3; 200]),
            Err(Error::DegenerateSamples("zero variance"))
        );
        assert_eq!(
            fit_ggd(&[0.0; 200]),
            Err(Error::DegenerateSamples("zero variance"))
        );
        assert!(matches!(
            fit_ggd(&[1.0; 10]),
            Err(Error::TooFewSamples { .. })
        ));
        let positive: Vec<f64> = (1..200).map(|i| i as f64).collect();
        assert!(fit_aggd(&positive).is_err());
        assert!(fit_aggd_lenient(&positive).is_some());
        assert!(fit_aggd_lenient(&[0.0; 50]).is_none());
    }
}
