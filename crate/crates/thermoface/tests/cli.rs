use std::path::Path;
use std::process::{Command, Output};

use thermoface::assets::{asset_dir, PAIRS_ENHANCED_DIR, PAIRS_ORIGINAL_DIR};
use thermoface::pipeline::QUALITY_HEADER;

fn thermoface(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermoface"))
        .args(args)
        .env_remove("THERMOFACE_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn original(name: &str) -> String {
    asset_dir()
        .join(PAIRS_ORIGINAL_DIR)
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn sorted_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn enhance_directory_of_pgms() {
    let input = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    for n in ["face1", "face2", "face3"] {
        std::fs::copy(
            original(&format!("{n}.pgm")),
            input.path().join(format!("{n}.pgm")),
        )
        .unwrap();
    }
    let o = thermoface(&["enhance", s(input.path()), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        sorted_names(out.path()),
        [
            "face1_refined.pgm",
            "face2_refined.pgm",
            "face3_refined.pgm"
        ]
    );
    assert!(stdout(&o).starts_with("3 processed"));
    let first = std::fs::read(out.path().join("face1_refined.pgm")).unwrap();
    // rerun: identical bytes
    let o = thermoface(&["enhance", s(input.path()), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read(out.path().join("face1_refined.pgm")).unwrap(),
        first
    );
}

#[test]
fn enhance_empty_directory_and_bad_files() {
    let input = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = thermoface(&["enhance", s(input.path()), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("0 processed"));

    std::fs::write(input.path().join("notes.txt"), "not an image").unwrap();
    std::fs::write(input.path().join("broken.pgm"), b"P5\n9 9\n255\nab").unwrap();
    std::fs::copy(original("face2.pgm"), input.path().join("good.pgm")).unwrap();
    let o = thermoface(&[
        "enhance",
        s(input.path()),
        "--out",
        s(out.path()),
        "--strips",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("skipping") && err.contains("notes.txt"),
        "{err}"
    );
    assert!(err.contains("broken.pgm"), "{err}");
    assert!(stdout(&o).starts_with("1 processed, 1 failed, 1 skipped"));
    assert_eq!(
        sorted_names(out.path()),
        ["good_refined.pgm", "good_strip.png"]
    );
}

#[test]
fn quality_report_shapes() {
    let out = tempfile::tempdir().unwrap();
    let dir = asset_dir();
    let o = thermoface(&[
        "quality",
        s(&dir.join(PAIRS_ORIGINAL_DIR)),
        s(&dir.join(PAIRS_ENHANCED_DIR)),
        "--out",
        s(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], QUALITY_HEADER);
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        assert!(l.ends_with(",true,true,"), "{l}");
    }
    assert_eq!(
        std::fs::read_to_string(out.path().join("quality.csv")).unwrap(),
        csv
    );

    // one worker or many: same report
    let single = Command::new(env!("CARGO_BIN_EXE_thermoface"))
        .args([
            "quality",
            s(&dir.join(PAIRS_ORIGINAL_DIR)),
            s(&dir.join(PAIRS_ENHANCED_DIR)),
        ])
        .args(["--out", s(out.path())])
        .env("THERMOFACE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&single), csv);
}

#[test]
fn quality_self_comparison_empty_input_and_missing_pairs() {
    let out = tempfile::tempdir().unwrap();
    let face = original("face3.pgm");
    let o = thermoface(&["quality", &face, &face, "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0));
    let row: Vec<String> = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(String::from)
        .collect();
    assert_eq!(row[1], row[2]);
    assert_eq!(row[3], row[4]);
    assert_eq!(&row[5..7], ["false", "false"]);

    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = thermoface(&["quality", s(a.path()), s(b.path()), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), format!("{QUALITY_HEADER}\n"));

    std::fs::copy(original("face1.pgm"), a.path().join("face1.pgm")).unwrap();
    std::fs::copy(original("face2.pgm"), a.path().join("face2.pgm")).unwrap();
    std::fs::copy(original("face2.pgm"), b.path().join("face2_refined.pgm")).unwrap();
    let o = thermoface(&["quality", s(a.path()), s(b.path()), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(
        lines[1].starts_with("face1,,,,,,,missing processed"),
        "{csv}"
    );
    assert!(lines[2].starts_with("face2,") && lines[2].ends_with(",false,false,"));
}

#[test]
fn reconstruct_outputs_and_errors() {
    let out = tempfile::tempdir().unwrap();
    let face = original("face2.pgm");
    let o = thermoface(&["reconstruct", &face, "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        sorted_names(out.path()),
        [
            "face2.obj",
            "face2_depth.png",
            "face2_yaw+0.png",
            "face2_yaw+15.png",
            "face2_yaw+30.png",
            "face2_yaw-15.png",
            "face2_yaw-30.png",
        ]
    );
    let o = thermoface(&[
        "reconstruct",
        &face,
        "--poses",
        "-45,10",
        "--out",
        s(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.path().join("face2_yaw-45.png").is_file());

    let o = thermoface(&["reconstruct", &face, "--checkpoint", "/missing/net.tprn"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/missing/net.tprn"));
    let o = thermoface(&[
        "reconstruct",
        &face,
        "--poses",
        "120",
        "--out",
        s(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = thermoface(&["reconstruct", "/missing/face.pgm", "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/missing/face.pgm"));
}

#[test]
fn train_determinism_validation_and_divergence() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = thermoface(&["train", "--iterations", "30", "--out", s(dir.path())]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("ratio"));
    }
    let ckpt = |d: &tempfile::TempDir| std::fs::read(d.path().join("checkpoint.tprn")).unwrap();
    assert_eq!(ckpt(&a), ckpt(&b));
    assert!(ckpt(&a).starts_with(b"TPRN"));
    let curve = std::fs::read_to_string(a.path().join("loss.csv")).unwrap();
    assert_eq!(curve.lines().next(), Some("iteration,loss"));
    assert_eq!(curve.lines().count(), 32);

    let o = thermoface(&["train", "--iterations", "0", "--out", s(a.path())]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = a.path().join("diverge.cfg");
    std::fs::write(
        &cfg,
        "train.learning_rate = 1e9\ntrain.warmup = 0\ntrain.iterations = 40\n",
    )
    .unwrap();
    let o = thermoface(&["train", "--config", s(&cfg), "--out", s(a.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("iteration"));
}

#[test]
fn demo_manifest_and_bad_config() {
    let out = tempfile::tempdir().unwrap();
    let o = thermoface(&["demo", &original("face3.pgm"), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(out.path().join("manifest.txt")).unwrap();
    for line in manifest.lines() {
        let (digest, name) = line.split_once("  ").unwrap();
        assert_eq!(digest.len(), 64);
        assert!(out.path().join(name).is_file(), "{name}");
    }
    assert_eq!(manifest.lines().count(), 15);

    let cfg = out.path().join("bad.cfg");
    std::fs::write(&cfg, "enhance.clahe_clip = lots\n").unwrap();
    let o = thermoface(&["demo", &original("face3.pgm"), "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"));

    let garbage = out.path().join("garbage.png");
    std::fs::write(
        &garbage,
        [0x89, b'P', b'N', b'G', 1, 2, 3, 4, 5, 6, 7, 8, 9],
    )
    .unwrap();
    let o = thermoface(&["demo", s(&garbage), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_model_refits_from_a_directory() {
    let out = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (i, img) in thermoface::corpus::pristine_corpus()
        .iter()
        .take(12)
        .enumerate()
    {
        thermoface::files::write_image(&dir.path().join(format!("{i:02}.pgm")), img).unwrap();
    }
    let target = out.path().join("m.tqm");
    let o = thermoface(&[
        "fit-model",
        s(dir.path()),
        "--kind",
        "niqe",
        "--output",
        s(&target),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(std::fs::read(&target).unwrap().starts_with(b"TQM1"));
    // twelve whole images cannot support a 36-dimensional covariance
    let o = thermoface(&[
        "fit-model",
        s(dir.path()),
        "--kind",
        "brisque",
        "--output",
        s(&target),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least 38"));
}
