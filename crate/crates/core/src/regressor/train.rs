use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;

use super::loss::LossKind;
use super::network::Network;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::posmap::{PositionMap, WeightMask};
use crate::rng::seeded;

pub const MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    GradientDescent,
    /// Heavy-ball momentum with coefficient [`MOMENTUM`].
    #[default]
    Momentum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Step size applied to the gradient divided by the total mask weight
    /// of the batch.
    pub learning_rate: f64,
    pub iterations: usize,
    /// Drives mini-batch selection.
    pub seed: u64,
    pub optimizer: Optimizer,
    pub loss: LossKind,
    /// Samples per step; 0 or anything above the dataset size means the
    /// whole dataset.
    pub batch_size: usize,
    /// The step size ramps up linearly over this many iterations.
    pub warmup: usize,
    /// After warmup the step size follows a half cosine down to zero at the
    /// last iteration.
    pub cosine_decay: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-4,
            iterations: 500,
            seed: 7,
            optimizer: Optimizer::Momentum,
            loss: LossKind::Euclidean,
            batch_size: 0,
            warmup: 50,
            cosine_decay: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive"));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1"));
        }
        Ok(())
    }

    /// Step size at `iteration` after warmup and decay.
    pub fn rate_at(&self, iteration: usize) -> f64 {
        if iteration < self.warmup {
            return self.learning_rate * (iteration + 1) as f64 / (self.warmup + 1) as f64;
        }
        if !self.cosine_decay {
            return self.learning_rate;
        }
        let span = self.iterations.saturating_sub(self.warmup).max(1) as f64;
        let progress = (iteration - self.warmup) as f64 / span;
        self.learning_rate * 0.5 * (1.0 + libm::cos(core::f64::consts::PI * progress))
    }
}

/// One training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Image,
    pub target: PositionMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub network: Network,
    /// Mean per-sample batch loss before each step.
    pub losses: Vec<f64>,
    /// Mean per-sample loss over the whole dataset after the last step.
    pub final_loss: f64,
}

fn dataset_loss(net: &Network, data: &[Sample], mask: &WeightMask, kind: LossKind) -> Result<f64> {
    let mut scratch = vec![0.0; net.param_count()];
    let mut total = 0.0;
    for s in data {
        total += net.accumulate_gradient(&s.image, &s.target, mask, kind, &mut scratch)?;
    }
    Ok(total / data.len() as f64)
}

/// Fits `net` to `data`. Deterministic for a given network, dataset and
/// configuration.
pub fn train(
    net: &Network,
    data: &[Sample],
    mask: &WeightMask,
    cfg: &TrainConfig,
) -> Result<Trained> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidConfig("training needs at least one sample"));
    }
    let total_weight: f64 = mask.data().iter().sum();
    if total_weight.is_nan() || total_weight <= 0.0 {
        return Err(Error::InvalidConfig("mask has no positive weight"));
    }
    let batch = if cfg.batch_size == 0 || cfg.batch_size >= data.len() {
        data.len()
    } else {
        cfg.batch_size
    };
    let mut rng = seeded(cfg.seed);
    let mut net = net.clone();
    let mut velocity = vec![0.0; net.param_count()];
    let mut grad = vec![0.0; net.param_count()];
    let mut losses = Vec::with_capacity(cfg.iterations);
    let all: Vec<usize> = (0..data.len()).collect();
    for iteration in 0..cfg.iterations {
        let picked = if batch == data.len() {
            all.clone()
        } else {
            let mut v = sample(&mut rng, data.len(), batch).into_vec();
            v.sort_unstable();
            v
        };
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for &i in &picked {
            loss += match net.accumulate_gradient(
                &data[i].image,
                &data[i].target,
                mask,
                cfg.loss,
                &mut grad,
            ) {
                Err(Error::NonFinite { .. }) => f64::NAN,
                other => other?,
            };
        }
        loss /= batch as f64;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration, loss });
        }
        losses.push(loss);
        let step = cfg.rate_at(iteration) / (total_weight * batch as f64);
        let params = net.params_mut();
        match cfg.optimizer {
            Optimizer::GradientDescent => {
                for (p, g) in params.iter_mut().zip(&grad) {
                    *p -= step * g;
                }
            }
            Optimizer::Momentum => {
                for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                    *v = MOMENTUM * *v + g;
                    *p -= step * *v;
                }
            }
        }
    }
    let final_loss = dataset_loss(&net, data, mask, cfg.loss)?;
    if !final_loss.is_finite() {
        return Err(Error::NonFiniteLoss {
            iteration: cfg.iterations,
            loss: final_loss,
        });
    }
    Ok(Trained {
        network: net,
        losses,
        final_loss,
    })
}
