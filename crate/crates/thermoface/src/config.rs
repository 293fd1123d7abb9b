//! Flat `key=value` pipeline configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! enhance.clahe_clip = 0.02
//! reconstruct.poses = -30, 0, 30
//! train.iterations = 300
//! output.dir = out
//! ```
//!
//! Unknown keys are rejected so typos surface. Paths are resolved as given.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thermoface_core::enhance::EnhanceConfig;
use thermoface_core::posmap::{Pose, DEFAULT_POSES};
use thermoface_core::quality::NiqeConfig;
use thermoface_core::regressor::{LossKind, Optimizer, TrainConfig};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QualitySettings {
    /// `None` uses the bundled model.
    pub niqe_model: Option<PathBuf>,
    pub brisque_model: Option<PathBuf>,
    pub niqe: NiqeConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructSettings {
    /// `None` uses the bundled checkpoint.
    pub checkpoint: Option<PathBuf>,
    pub poses: Vec<f64>,
    /// Texels whose mask weight exceeds this become mesh vertices.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub train: TrainConfig,
    /// Synthetic faces in the training set.
    pub samples: usize,
    /// Seed of the synthetic faces; the network is seeded from `train.seed`.
    pub data_seed: u64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            samples: 1,
            data_seed: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub enhance: EnhanceConfig,
    pub quality: QualitySettings,
    pub reconstruct: ReconstructSettings,
    pub train: TrainSettings,
    pub output_dir: PathBuf,
    /// Also write input | output strips from `enhance`.
    pub strips: bool,
    /// Worker bound; `None` means one per available core.
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            enhance: EnhanceConfig::default(),
            quality: QualitySettings {
                niqe_model: None,
                brisque_model: None,
                niqe: NiqeConfig::default(),
            },
            reconstruct: ReconstructSettings {
                checkpoint: None,
                poses: DEFAULT_POSES.to_vec(),
                threshold: 0.5,
            },
            train: TrainSettings::default(),
            output_dir: PathBuf::from("out"),
            strips: false,
            threads: None,
        }
    }
}

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        message: format!("{key}: cannot parse {value:?}"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config {
            line,
            message: format!("{key}: expected true or false, got {value:?}"),
        }),
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected key=value, got {content:?}"),
            })?;
            cfg.set(line, key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        let e = &mut self.enhance;
        let t = &mut self.train.train;
        match key {
            "enhance.clahe_tiles" => e.clahe_tiles = parse(line, key, v)?,
            "enhance.clahe_clip" => e.clahe_clip = parse(line, key, v)?,
            "enhance.fusion_levels" => e.fusion_levels = parse(line, key, v)?,
            "enhance.exposedness_sigma" => e.exposedness_sigma = parse(line, key, v)?,
            "enhance.normalization_epsilon" => e.normalization_epsilon = parse(line, key, v)?,
            "quality.niqe_model" => self.quality.niqe_model = Some(PathBuf::from(v)),
            "quality.brisque_model" => self.quality.brisque_model = Some(PathBuf::from(v)),
            "quality.patch_size" => self.quality.niqe.patch_size = parse(line, key, v)?,
            "quality.sharpness_quantile" => {
                self.quality.niqe.sharpness_quantile = parse(line, key, v)?
            }
            "reconstruct.checkpoint" => self.reconstruct.checkpoint = Some(PathBuf::from(v)),
            "reconstruct.poses" => {
                self.reconstruct.poses = v
                    .split(',')
                    .map(|p| parse(line, key, p.trim()))
                    .collect::<Result<_>>()?
            }
            "reconstruct.threshold" => self.reconstruct.threshold = parse(line, key, v)?,
            "train.learning_rate" => t.learning_rate = parse(line, key, v)?,
            "train.iterations" => t.iterations = parse(line, key, v)?,
            "train.seed" => t.seed = parse(line, key, v)?,
            "train.batch_size" => t.batch_size = parse(line, key, v)?,
            "train.warmup" => t.warmup = parse(line, key, v)?,
            "train.cosine_decay" => t.cosine_decay = parse_bool(line, key, v)?,
            "train.optimizer" => {
                t.optimizer = match v {
                    "momentum" => Optimizer::Momentum,
                    "sgd" | "gd" => Optimizer::GradientDescent,
                    _ => {
                        return Err(Error::Config {
                            line,
                            message: format!("{key}: expected momentum or sgd, got {v:?}"),
                        })
                    }
                }
            }
            "train.loss" => {
                t.loss = match v {
                    "euclidean" => LossKind::Euclidean,
                    "squared" => LossKind::Squared,
                    _ => {
                        return Err(Error::Config {
                            line,
                            message: format!("{key}: expected euclidean or squared, got {v:?}"),
                        })
                    }
                }
            }
            "train.samples" => self.train.samples = parse(line, key, v)?,
            "train.data_seed" => self.train.data_seed = parse(line, key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            "output.strips" => self.strips = parse_bool(line, key, v)?,
            "output.report_format" if v == "csv" => {}
            "output.report_format" => {
                return Err(Error::Config {
                    line,
                    message: format!("{key}: only csv is supported, got {v:?}"),
                })
            }
            "threads" => self.threads = Some(parse(line, key, v)?),
            _ => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key {key:?}"),
                })
            }
        }
        Ok(())
    }

    /// Checks ranges and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::Config { line: 0, message };
        self.enhance.validate()?;
        self.train.train.validate()?;
        for &p in &self.reconstruct.poses {
            Pose::new(p)?;
        }
        if self.reconstruct.poses.is_empty() {
            return Err(invalid("reconstruct.poses is empty".into()));
        }
        let q = &self.quality.niqe;
        if q.patch_size < 8 || !(0.0..=1.0).contains(&q.sharpness_quantile) {
            return Err(invalid(
                "quality.patch_size must be at least 8 and quality.sharpness_quantile in [0, 1]"
                    .into(),
            ));
        }
        if self.train.samples == 0 {
            return Err(invalid("train.samples must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1".into()));
        }
        let paths = [
            &self.quality.niqe_model,
            &self.quality.brisque_model,
            &self.reconstruct.checkpoint,
        ];
        for p in paths.into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::Input(format!("{}: no such file", p.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg = PipelineConfig::parse(
            "# demo\n enhance.clahe_clip = 0.02 \nreconstruct.poses=-10, 10\n\ntrain.optimizer=sgd # inline\nthreads=2\n",
        )
        .unwrap();
        assert_eq!(cfg.enhance.clahe_clip, 0.02);
        assert_eq!(cfg.reconstruct.poses, vec![-10.0, 10.0]);
        assert_eq!(cfg.train.train.optimizer, Optimizer::GradientDescent);
        assert_eq!(cfg.threads, Some(2));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let err = PipelineConfig::parse("a=1\nbogus.key=3").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        assert!(PipelineConfig::parse("train.iterations=x").is_err());
        assert!(PipelineConfig::parse("no equals sign").is_err());
        assert!(PipelineConfig::parse("output.report_format=json").is_err());
        let zero = PipelineConfig::parse("train.iterations=0").unwrap();
        assert!(zero.validate().is_err());
        let lr = PipelineConfig::parse("train.learning_rate=0").unwrap();
        assert!(lr.validate().is_err());
        let pose = PipelineConfig::parse("reconstruct.poses=0,95").unwrap();
        assert!(pose.validate().is_err());
        let missing = PipelineConfig::parse("reconstruct.checkpoint=/no/such.tprn").unwrap();
        assert!(matches!(missing.validate(), Err(Error::Input(m)) if m.contains("/no/such.tprn")));
    }
}
