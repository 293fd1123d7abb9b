//! Files shipped inside the binary, and the generators that produce them.
//!
//! `tests/bundled_assets.rs` checks that every file matches its generator;
//! run it with `THERMOFACE_REGEN_ASSETS=1` to rewrite them.

use std::path::{Path, PathBuf};

use thermoface_core::quality::{fit_pristine_model, ModelKind, NiqeConfig, QualityModel};
use thermoface_core::regressor::Network;

use crate::config::TrainSettings;
use crate::corpus::{degraded_pairs, pristine_corpus, Pair};
use crate::error::Result;
use crate::files::{decode_checkpoint, decode_model};

const NIQE_MODEL: &[u8] = include_bytes!("../assets/models/niqe.tqm");
const BRISQUE_MODEL: &[u8] = include_bytes!("../assets/models/brisque.tqm");
const CHECKPOINT: &[u8] = include_bytes!("../assets/desk.tprn");

/// Root of the source-tree asset directory.
pub fn asset_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets")
}

/// Relative paths of the bundled model files.
pub const NIQE_MODEL_PATH: &str = "models/niqe.tqm";
pub const BRISQUE_MODEL_PATH: &str = "models/brisque.tqm";
pub const CHECKPOINT_PATH: &str = "desk.tprn";
/// Originals and enhanced versions share basenames in these directories.
pub const PAIRS_ORIGINAL_DIR: &str = "pairs/original";
pub const PAIRS_ENHANCED_DIR: &str = "pairs/enhanced";

/// The pristine model for `kind` fitted on the synthetic corpus.
pub fn bundled_model(kind: ModelKind) -> Result<QualityModel> {
    let bytes = match kind {
        ModelKind::Niqe => NIQE_MODEL,
        ModelKind::BrisqueDistance => BRISQUE_MODEL,
    };
    decode_model(bytes, kind)
}

/// The desk-scale network trained with the default configuration.
pub fn bundled_checkpoint() -> Result<Network> {
    decode_checkpoint(CHECKPOINT)
}

/// Fits both pristine models on [`pristine_corpus`].
pub fn generate_models() -> Result<(QualityModel, QualityModel)> {
    let corpus = pristine_corpus();
    let cfg = NiqeConfig::default();
    Ok((
        fit_pristine_model(&corpus, ModelKind::Niqe, &cfg)?,
        fit_pristine_model(&corpus, ModelKind::BrisqueDistance, &cfg)?,
    ))
}

/// Trains the default desk-scale network.
pub fn generate_checkpoint() -> Result<Network> {
    Ok(crate::pipeline::train_network(&TrainSettings::default())?.network)
}

/// The degraded/enhanced pairs.
pub fn generate_pairs() -> Result<Vec<Pair>> {
    Ok(degraded_pairs()?)
}
