use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::posmap::{PositionMap, WeightMask};

/// Smoothing added under the square root so the Euclidean loss is
/// differentiable where prediction and target agree.
pub const LOSS_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    /// `Σ W · ‖pred − gt‖`, smoothed as `sqrt(‖d‖² + ε) − sqrt(ε)` so it is
    /// exactly zero for a perfect prediction.
    #[default]
    Euclidean,
    /// `Σ W · ‖pred − gt‖²`.
    Squared,
}

fn check(pred: &PositionMap, gt: &PositionMap, mask: &WeightMask) -> Result<()> {
    let same = pred.width() == gt.width()
        && pred.height() == gt.height()
        && mask.width() == gt.width()
        && mask.height() == gt.height();
    if same {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(
            "prediction, target and mask resolutions differ",
        ))
    }
}

/// Weight-masked position-map loss with the Euclidean texel norm.
pub fn weighted_loss(pred: &PositionMap, gt: &PositionMap, mask: &WeightMask) -> Result<f64> {
    weighted_loss_with(pred, gt, mask, LossKind::Euclidean)
}

pub fn weighted_loss_with(
    pred: &PositionMap,
    gt: &PositionMap,
    mask: &WeightMask,
    kind: LossKind,
) -> Result<f64> {
    Ok(loss_and_grad(pred, gt, mask, kind)?.0)
}

/// Loss and its gradient with respect to the planar prediction.
pub(crate) fn loss_and_grad(
    pred: &PositionMap,
    gt: &PositionMap,
    mask: &WeightMask,
    kind: LossKind,
) -> Result<(f64, Vec<f64>)> {
    check(pred, gt, mask)?;
    let n = gt.width() * gt.height();
    let (p, g) = (pred.data(), gt.data());
    let floor = libm::sqrt(LOSS_EPSILON);
    let mut grad = vec![0.0; 3 * n];
    let mut loss = 0.0;
    for (i, &w) in mask.data().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let d = [
            p[i] - g[i],
            p[n + i] - g[n + i],
            p[2 * n + i] - g[2 * n + i],
        ];
        let sq = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let scale = match kind {
            LossKind::Euclidean => {
                let r = libm::sqrt(sq + LOSS_EPSILON);
                loss += w * (r - floor);
                w / r
            }
            LossKind::Squared => {
                loss += w * sq;
                2.0 * w
            }
        };
        for c in 0..3 {
            grad[c * n + i] = scale * d[c];
        }
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(p: [f64; 3]) -> PositionMap {
        PositionMap::from_fn(1, 1, |_, _| p).unwrap()
    }

    #[test]
    fn three_four_five() {
        let w = WeightMask::filled(1, 1, 2.0).unwrap();
        let l = weighted_loss(&one([3.0, 4.0, 0.0]), &one([0.0; 3]), &w).unwrap();
        assert!((l - 10.0).abs() < 1e-5);
        let l = weighted_loss_with(&one([3.0, 4.0, 0.0]), &one([0.0; 3]), &w, LossKind::Squared)
            .unwrap();
        assert_eq!(l, 50.0);
    }

    #[test]
    fn zero_cases() {
        let a = one([1.0, 2.0, 3.0]);
        let w = WeightMask::filled(1, 1, 1.0).unwrap();
        assert_eq!(weighted_loss(&a, &a, &w).unwrap(), 0.0);
        let z = WeightMask::filled(1, 1, 0.0).unwrap();
        assert_eq!(weighted_loss(&a, &one([9.0; 3]), &z).unwrap(), 0.0);
        let big = WeightMask::filled(2, 1, 1.0).unwrap();
        assert!(weighted_loss(&a, &a, &big).is_err());
    }
}
