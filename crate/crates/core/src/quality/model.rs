use alloc::vec::Vec;

use super::features::{brisque_features, niqe_features, NiqeConfig, FEATURE_DIM};
use super::linalg::{cholesky, cholesky_solve, mean_and_covariance};
use crate::error::{Error, Result};
use crate::image::Image;

/// Added to the diagonal of every fitted covariance.
pub const COVARIANCE_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Multivariate Gaussian fit to sharp-patch features; scored with the
    /// image's own patch statistics.
    Niqe,
    /// Gaussian fit to whole-image spatial features; scored by Mahalanobis
    /// distance. This stands in for the usual learned regressor.
    BrisqueDistance,
}

/// A pristine multivariate Gaussian in feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityModel {
    kind: ModelKind,
    mean: Vec<f64>,
    covariance: Vec<f64>,
}

impl QualityModel {
    /// Builds a model from a mean and a row-major covariance, checking shape
    /// and symmetry.
    pub fn new(kind: ModelKind, mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || covariance.len() != dim * dim {
            return Err(Error::DimensionMismatch("covariance must be dim x dim"));
        }
        if mean.iter().chain(&covariance).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateSamples("model parameters must be finite"));
        }
        for i in 0..dim {
            if covariance[i * dim + i] < 0.0 {
                return Err(Error::SingularCovariance);
            }
            for j in 0..i {
                let (a, b) = (covariance[i * dim + j], covariance[j * dim + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::DimensionMismatch("covariance is not symmetric"));
                }
            }
        }
        Ok(Self {
            kind,
            mean,
            covariance,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn feature_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }
}

/// Fits a model directly to feature vectors.
pub fn fit_model_from_vectors(kind: ModelKind, vectors: &[Vec<f64>]) -> Result<QualityModel> {
    let dim = vectors.first().map_or(0, Vec::len);
    if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch("feature vectors differ in length"));
    }
    if vectors.len() < dim + 2 {
        return Err(Error::TooFewSamples {
            needed: dim + 2,
            actual: vectors.len(),
        });
    }
    let (mean, mut covariance) = mean_and_covariance(vectors);
    for i in 0..dim {
        covariance[i * dim + i] += COVARIANCE_RIDGE;
    }
    QualityModel::new(kind, mean, covariance)
}

/// Pools the features of a pristine corpus into a model of the given kind.
pub fn fit_pristine_model(
    corpus: &[Image],
    kind: ModelKind,
    niqe: &NiqeConfig,
) -> Result<QualityModel> {
    let mut vectors = Vec::new();
    for img in corpus {
        match kind {
            ModelKind::Niqe => vectors.extend(niqe_features(img, niqe)?),
            ModelKind::BrisqueDistance => vectors.push(brisque_features(img)?),
        }
    }
    if vectors.is_empty() {
        return Err(Error::TooFewSamples {
            needed: FEATURE_DIM + 2,
            actual: 0,
        });
    }
    fit_model_from_vectors(kind, &vectors)
}

/// `sqrt(dᵀ S⁻¹ d)`.
pub(crate) fn mahalanobis(d: &[f64], s: &[f64]) -> Result<f64> {
    let n = d.len();
    let l = cholesky(s, n).ok_or(Error::SingularCovariance)?;
    let y = cholesky_solve(&l, n, d);
    let q: f64 = d.iter().zip(&y).map(|(a, b)| a * b).sum();
    Ok(libm::sqrt(q.max(0.0)))
}

/// Quality score of `img` against `model`; lower is better.
///
/// NIQE compares the mean of the image's sharp-patch features with the model
/// mean under the average of both covariances. The BRISQUE-style distance is
/// the Mahalanobis distance of the whole-image feature vector.
pub fn score(img: &Image, model: &QualityModel, niqe: &NiqeConfig) -> Result<f64> {
    let dim = model.feature_dim();
    match model.kind {
        ModelKind::Niqe => {
            let patches = niqe_features(img, niqe)?;
            if patches.is_empty() {
                return Err(Error::NoSharpPatches);
            }
            if patches[0].len() != dim {
                return Err(Error::DimensionMismatch(
                    "model dimension does not match features",
                ));
            }
            let (mu, cov) = mean_and_covariance(&patches);
            let pooled: Vec<f64> = cov
                .iter()
                .zip(&model.covariance)
                .map(|(a, b)| (a + b) / 2.0)
                .collect();
            let d: Vec<f64> = mu.iter().zip(&model.mean).map(|(a, b)| a - b).collect();
            mahalanobis(&d, &pooled)
        }
        ModelKind::BrisqueDistance => {
            let f = brisque_features(img)?;
            if f.len() != dim {
                return Err(Error::DimensionMismatch(
                    "model dimension does not match features",
                ));
            }
            let d: Vec<f64> = f.iter().zip(&model.mean).map(|(a, b)| a - b).collect();
            mahalanobis(&d, &model.covariance)
        }
    }
}
