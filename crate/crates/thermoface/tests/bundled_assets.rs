//! Every bundled asset must equal what its generator produces. Set
//! `THERMOFACE_REGEN_ASSETS=1` to rewrite them.

use thermoface::assets::*;
use thermoface::config::TrainSettings;
use thermoface::files::{
    encode_checkpoint, encode_model, read_bytes, read_image, write_bytes, write_image,
};
use thermoface::pipeline::train_network;
use thermoface_core::quality::ModelKind;

fn regen() -> bool {
    std::env::var_os("THERMOFACE_REGEN_ASSETS").is_some()
}

#[test]
fn models_match_the_pristine_corpus() {
    let (niqe, brisque) = generate_models().unwrap();
    let dir = asset_dir();
    if regen() {
        write_bytes(&dir.join(NIQE_MODEL_PATH), &encode_model(&niqe)).unwrap();
        write_bytes(&dir.join(BRISQUE_MODEL_PATH), &encode_model(&brisque)).unwrap();
        return;
    }
    assert_eq!(bundled_model(ModelKind::Niqe).unwrap(), niqe);
    assert_eq!(bundled_model(ModelKind::BrisqueDistance).unwrap(), brisque);
}

#[test]
fn checkpoint_matches_default_training() {
    let run = train_network(&TrainSettings::default()).unwrap();
    let ratio = run.final_loss / run.losses[0];
    assert!(ratio <= 0.1, "default training loss ratio {ratio}");
    let bytes = encode_checkpoint(&run.network);
    assert_eq!(encode_checkpoint(&generate_checkpoint().unwrap()), bytes);
    let path = asset_dir().join(CHECKPOINT_PATH);
    if regen() {
        write_bytes(&path, &bytes).unwrap();
        return;
    }
    assert_eq!(read_bytes(&path).unwrap(), bytes);
    assert_eq!(encode_checkpoint(&bundled_checkpoint().unwrap()), bytes);
}

#[test]
fn pairs_match_the_generator() {
    let dir = asset_dir();
    for pair in generate_pairs().unwrap() {
        let o = dir
            .join(PAIRS_ORIGINAL_DIR)
            .join(format!("{}.pgm", pair.name));
        let e = dir
            .join(PAIRS_ENHANCED_DIR)
            .join(format!("{}.pgm", pair.name));
        if regen() {
            write_image(&o, &pair.original).unwrap();
            write_image(&e, &pair.processed).unwrap();
            continue;
        }
        assert_eq!(read_image(&o).unwrap(), pair.original, "{}", o.display());
        assert_eq!(read_image(&e).unwrap(), pair.processed, "{}", e.display());
    }
}
