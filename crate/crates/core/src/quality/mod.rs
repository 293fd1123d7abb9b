//! No-reference quality scoring from natural scene statistics.

mod features;
mod gamma;
mod ggd;
mod linalg;
mod model;
mod mscn;

pub use features::{
    brisque_features, niqe_features, scale_features, NiqeConfig, FEATURES_PER_SCALE, FEATURE_DIM,
    MIN_BRISQUE_SIZE,
};
pub use gamma::gamma;
pub use ggd::{
    fit_aggd, fit_ggd, ggd_moment_ratio, solve_shape, AggdParams, GgdParams, MIN_SAMPLES,
    SHAPE_MAX, SHAPE_MIN, SHAPE_STEP,
};
pub use linalg::mean_and_covariance;
pub use model::{
    fit_model_from_vectors, fit_pristine_model, score, ModelKind, QualityModel, COVARIANCE_RIDGE,
};
pub use mscn::{mscn, MscnField, STABILIZER, WINDOW, WINDOW_SIGMA};
