//! The batch commands behind the `thermoface` binary.
//!
//! Each command returns a [`Report`] instead of printing, so tests can
//! inspect what happened. Fatal errors come back as `Err`; per-file problems
//! are collected in the report and turn into exit code 2.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thermoface_core::enhance::{enhance, enhance_stages};
use thermoface_core::posmap::{
    mesh_from_posmap, render_depth, render_mesh, rotate_yaw, texture_vertices, FaceMesh, Pose,
    RenderMode, WeightMask,
};
use thermoface_core::quality::{fit_pristine_model, score, ModelKind, NiqeConfig, QualityModel};
use thermoface_core::regressor::{
    default_weight_mask, synthetic_dataset, train, Network, NetworkSpec, Trained,
};
use thermoface_core::Image;

use crate::assets::{bundled_checkpoint, bundled_model};
use crate::codec::ImageFormat;
use crate::config::{PipelineConfig, ReconstructSettings, TrainSettings};
use crate::error::{Error, Result};
use crate::files::{
    decode_checkpoint, encode_checkpoint, encode_model, read_bytes, read_image, write_bytes,
    write_image, write_obj,
};

/// Overrides the configured worker bound.
pub const THREADS_ENV: &str = "THERMOFACE_THREADS";

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    /// Files written, in input order.
    pub written: Vec<PathBuf>,
    /// Skipped inputs and other non-fatal notes.
    pub warnings: Vec<String>,
    /// One line per input that could not be processed.
    pub failures: Vec<String>,
    /// Printed to stdout.
    pub summary: String,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

/// `THERMOFACE_THREADS`, then the config, then the number of cores.
pub fn worker_count(cfg: &PipelineConfig) -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .or(cfg.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_pooled<T, R, F>(cfg: &PipelineConfig, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg))
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))?;
    // collect keeps input order whatever order the workers finish in
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// Image files under `path` (sorted by name) and the other files skipped.
/// A single file counts as a one-entry directory.
pub fn list_inputs(path: &Path) -> Result<(Vec<PathBuf>, Vec<PathBuf>)> {
    let mut entries = if path.is_dir() {
        let dir = std::fs::read_dir(path).map_err(|e| Error::io(path, e))?;
        let mut files = Vec::new();
        for entry in dir {
            let p = entry.map_err(|e| Error::io(path, e))?.path();
            if p.is_file() {
                files.push(p);
            }
        }
        files
    } else if path.is_file() {
        vec![path.to_path_buf()]
    } else {
        return Err(Error::Input(format!(
            "{}: no such file or directory",
            path.display()
        )));
    };
    entries.sort();
    Ok(entries
        .into_iter()
        .partition(|p| ImageFormat::from_path(p).is_some()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// The error message, prefixed with `path` unless it already names it.
fn with_path(path: &Path, e: &Error) -> String {
    let (p, msg) = (path.display().to_string(), e.to_string());
    if msg.starts_with(&p) {
        msg
    } else {
        format!("{p}: {msg}")
    }
}

/// Places `a` and `b` side by side.
pub fn side_by_side(a: &Image, b: &Image) -> Result<Image> {
    let (a, b) = if a.channels() == b.channels() {
        (a.clone(), b.clone())
    } else {
        (a.to_rgb(), b.to_rgb())
    };
    let (w, h, ch) = (
        a.width() + b.width(),
        a.height().max(b.height()),
        a.channels(),
    );
    let mut data = vec![0.0; w * h * ch];
    for c in 0..ch {
        for (img, x0) in [(&a, 0), (&b, a.width())] {
            for y in 0..img.height() {
                for x in 0..img.width() {
                    data[c * w * h + y * w + x0 + x] = img.get(x, y, c);
                }
            }
        }
    }
    Ok(Image::from_planar(w, h, ch, data)?)
}

/// Writes `<stem>_refined.<ext>` (and optionally `<stem>_strip.png`) for
/// every image under `input`.
pub fn cmd_enhance(input: &Path, cfg: &PipelineConfig) -> Result<Report> {
    cfg.enhance.validate()?;
    let (images, skipped) = list_inputs(input)?;
    let out = &cfg.output_dir;
    let results = run_pooled(cfg, &images, |path| -> Result<Vec<PathBuf>> {
        let img = read_image(path)?;
        let refined = enhance(&img, &cfg.enhance)?;
        let format = ImageFormat::from_path(path)
            .unwrap_or(ImageFormat::Png)
            .for_channels(refined.channels());
        let name = format!("{}_refined.{}", stem(path), format.extension());
        let target = out.join(name);
        write_image(&target, &refined)?;
        let mut written = vec![target];
        if cfg.strips {
            let strip = out.join(format!("{}_strip.png", stem(path)));
            write_image(&strip, &side_by_side(&img, &refined)?)?;
            written.push(strip);
        }
        Ok(written)
    })?;
    let mut report = Report {
        warnings: skipped
            .iter()
            .map(|p| format!("skipping {}: not a PGM, PPM or PNG file", p.display()))
            .collect(),
        ..Report::default()
    };
    let mut processed = 0;
    for (path, r) in images.iter().zip(results) {
        match r {
            Ok(w) => {
                processed += 1;
                report.written.extend(w);
            }
            Err(e) => report.failures.push(with_path(path, &e)),
        }
    }
    report.summary = format!(
        "{processed} processed, {} failed, {} skipped",
        report.failures.len(),
        skipped.len()
    );
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityRow {
    pub file: String,
    /// `[niqe_original, niqe_processed, brisque_original, brisque_processed]`,
    /// or why the pair could not be scored.
    pub scores: std::result::Result<[f64; 4], String>,
}

impl QualityRow {
    pub fn niqe_improved(&self) -> Option<bool> {
        self.scores.as_ref().ok().map(|s| s[1] < s[0])
    }

    pub fn brisque_improved(&self) -> Option<bool> {
        self.scores.as_ref().ok().map(|s| s[3] < s[2])
    }
}

pub const QUALITY_HEADER: &str = "file,niqe_original,niqe_processed,brisque_original,brisque_processed,niqe_improved,brisque_improved,error";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn quality_csv(rows: &[QualityRow]) -> String {
    let mut out = format!("{QUALITY_HEADER}\n");
    for r in rows {
        let file = csv_field(&r.file);
        match &r.scores {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "{file},{:.6},{:.6},{:.6},{:.6},{},{},",
                    s[0],
                    s[1],
                    s[2],
                    s[3],
                    s[1] < s[0],
                    s[3] < s[2]
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{file},,,,,,,{}", csv_field(e));
            }
        }
    }
    out
}

fn load_model(path: Option<&Path>, kind: ModelKind) -> Result<QualityModel> {
    match path {
        Some(p) => crate::files::decode_model(&read_bytes(p)?, kind),
        None => bundled_model(kind),
    }
}

/// A pair key with whichever members were found.
type PairEntry = (String, Option<PathBuf>, Option<PathBuf>);

/// Matches originals to processed images by basename. A processed file may
/// also carry the `_refined` suffix written by `enhance`.
fn pair_up(original: &Path, processed: &Path) -> Result<Vec<PairEntry>> {
    if original.is_file() && processed.is_file() {
        return Ok(vec![(
            stem(original),
            Some(original.to_path_buf()),
            Some(processed.to_path_buf()),
        )]);
    }
    let mut map: BTreeMap<String, (Option<PathBuf>, Option<PathBuf>)> = BTreeMap::new();
    for p in list_inputs(original)?.0 {
        map.entry(stem(&p)).or_default().0.get_or_insert(p);
    }
    for p in list_inputs(processed)?.0 {
        let s = stem(&p);
        let key = s.strip_suffix("_refined").unwrap_or(&s).to_owned();
        map.entry(key).or_default().1.get_or_insert(p);
    }
    Ok(map.into_iter().map(|(k, (o, p))| (k, o, p)).collect())
}

/// Scores each original/processed pair under both metrics.
pub fn quality_rows(
    original: &Path,
    processed: &Path,
    cfg: &PipelineConfig,
) -> Result<Vec<QualityRow>> {
    let q = &cfg.quality;
    let niqe = load_model(q.niqe_model.as_deref(), ModelKind::Niqe)?;
    let brisque = load_model(q.brisque_model.as_deref(), ModelKind::BrisqueDistance)?;
    let pairs = pair_up(original, processed)?;
    let score_pair = |o: &Path, p: &Path| -> Result<[f64; 4]> {
        let (a, b) = (read_image(o)?, read_image(p)?);
        Ok([
            score(&a, &niqe, &q.niqe)?,
            score(&b, &niqe, &q.niqe)?,
            score(&a, &brisque, &q.niqe)?,
            score(&b, &brisque, &q.niqe)?,
        ])
    };
    run_pooled(cfg, &pairs, |(name, o, p)| {
        let scores = match (o, p) {
            (Some(o), Some(p)) => score_pair(o, p).map_err(|e| e.to_string()),
            (None, _) => Err("missing original".to_owned()),
            (_, None) => Err("missing processed image".to_owned()),
        };
        QualityRow {
            file: name.clone(),
            scores,
        }
    })
}

/// Writes `quality.csv` into the output directory; the CSV is also the
/// summary.
pub fn cmd_quality(original: &Path, processed: &Path, cfg: &PipelineConfig) -> Result<Report> {
    let rows = quality_rows(original, processed, cfg)?;
    let csv = quality_csv(&rows);
    let target = cfg.output_dir.join("quality.csv");
    write_bytes(&target, csv.as_bytes())?;
    Ok(Report {
        written: vec![target],
        warnings: Vec::new(),
        failures: rows
            .iter()
            .filter_map(|r| r.scores.as_ref().err().map(|e| format!("{}: {e}", r.file)))
            .collect(),
        summary: csv,
    })
}

/// Reconstructed mesh and its renders at the source image size.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub mesh: FaceMesh,
    /// `(yaw degrees, textured render)` per configured pose.
    pub poses: Vec<(f64, Image)>,
    pub depth: Image,
}

pub fn load_network(path: Option<&Path>) -> Result<Network> {
    match path {
        Some(p) => decode_checkpoint(&read_bytes(p)?),
        None => bundled_checkpoint(),
    }
}

/// Reads a mask stored as raw byte weights, like the bundled one.
pub fn read_mask(path: &Path) -> Result<WeightMask> {
    let img = read_image(path)?;
    if img.channels() != 1 {
        return Err(Error::Input(format!(
            "{}: weight mask must be single-channel",
            path.display()
        )));
    }
    let data = img.data().iter().map(|v| (v * 255.0).round()).collect();
    Ok(WeightMask::new(img.width(), img.height(), data)?)
}

/// Regresses a position map from `img`, scales it back to the image size
/// and renders every pose plus a depth map.
pub fn reconstruct(
    img: &Image,
    net: &Network,
    mask: Option<&WeightMask>,
    settings: &ReconstructSettings,
) -> Result<Reconstruction> {
    let spec = net.spec();
    let n = spec.input_size;
    if spec.in_channels != 1 && spec.in_channels != 3 {
        return Err(Error::Input(format!(
            "checkpoint expects {} input channels; only 1 or 3 are supported",
            spec.in_channels
        )));
    }
    let mask = match mask {
        Some(m) if m.width() != m.height() => {
            return Err(Error::Input(format!(
                "weight mask is {}x{}, expected a square mask",
                m.width(),
                m.height()
            )))
        }
        Some(m) => m.resample_nearest(n, n)?,
        None => default_weight_mask(n)?,
    };
    let (w, h) = (img.width(), img.height());
    let small = img.resize_bilinear(n, n)?;
    let pm = net.forward(&small)?;
    let (sx, sy) = (w as f64 / n as f64, h as f64 / n as f64);
    let pm = pm.scaled(sx, sy, 0.5 * (sx + sy));
    let mesh = texture_vertices(&mesh_from_posmap(&pm, &mask, settings.threshold)?, img);
    let poses = settings
        .poses
        .iter()
        .map(|&yaw| {
            let rotated = rotate_yaw(&mesh, &Pose::new(yaw)?);
            Ok((yaw, render_mesh(&rotated, w, h, RenderMode::Textured)?))
        })
        .collect::<Result<_>>()?;
    let depth = render_depth(&mesh, w, h)?;
    Ok(Reconstruction { mesh, poses, depth })
}

/// `<name>_yaw+15.png` style pose file name.
pub fn pose_file_name(name: &str, yaw: f64) -> String {
    format!("{name}_yaw{yaw:+}.png")
}

fn write_reconstruction(dir: &Path, name: &str, r: &Reconstruction) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let obj = dir.join(format!("{name}.obj"));
    write_obj(&obj, &r.mesh)?;
    written.push(obj);
    for (yaw, img) in &r.poses {
        let p = dir.join(pose_file_name(name, *yaw));
        write_image(&p, img)?;
        written.push(p);
    }
    let depth = dir.join(format!("{name}_depth.png"));
    write_image(&depth, &r.depth)?;
    written.push(depth);
    Ok(written)
}

pub fn cmd_reconstruct(image: &Path, mask: Option<&Path>, cfg: &PipelineConfig) -> Result<Report> {
    let net = load_network(cfg.reconstruct.checkpoint.as_deref())?;
    let mask = mask.map(read_mask).transpose()?;
    let img = read_image(image)?;
    let r = reconstruct(&img, &net, mask.as_ref(), &cfg.reconstruct)?;
    let written = write_reconstruction(&cfg.output_dir, &stem(image), &r)?;
    Ok(Report {
        summary: format!(
            "{} vertices, {} triangles, {} files written",
            r.mesh.vertices().len(),
            r.mesh.triangles().len(),
            written.len()
        ),
        written,
        ..Report::default()
    })
}

/// Trains the desk-scale network on synthetic faces.
pub fn train_network(settings: &TrainSettings) -> Result<Trained> {
    settings.train.validate()?;
    if settings.samples == 0 {
        return Err(Error::Input("train.samples must be at least 1".into()));
    }
    let spec = NetworkSpec::desk_scale();
    let n = spec.input_size;
    let data = synthetic_dataset(n, settings.samples, settings.data_seed)?;
    let net = Network::new(spec, settings.train.seed)?;
    let mask = default_weight_mask(n)?;
    Ok(train(&net, &data, &mask, &settings.train)?)
}

pub fn loss_csv(losses: &[f64]) -> String {
    let mut out = String::from("iteration,loss\n");
    for (i, l) in losses.iter().enumerate() {
        let _ = writeln!(out, "{i},{l:e}");
    }
    out
}

/// Writes `checkpoint.tprn` and `loss.csv`.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<Report> {
    let run = train_network(&cfg.train)?;
    let ckpt = cfg.output_dir.join("checkpoint.tprn");
    write_bytes(&ckpt, &encode_checkpoint(&run.network))?;
    let curve = cfg.output_dir.join("loss.csv");
    let mut losses = run.losses.clone();
    losses.push(run.final_loss);
    write_bytes(&curve, loss_csv(&losses).as_bytes())?;
    let ratio = run.final_loss / run.losses[0];
    Ok(Report {
        written: vec![ckpt, curve],
        summary: format!(
            "initial loss {:.6e}, final loss {:.6e}, final/initial ratio {ratio:.6}",
            run.losses[0], run.final_loss
        ),
        ..Report::default()
    })
}

/// Name used for the reconstruction files of `demo`.
pub const DEMO_NAME: &str = "face";
pub const MANIFEST: &str = "manifest.txt";

/// Stage images `a`..`h`, the reconstruction of the refined image and a
/// `manifest.txt` of `sha256  file` lines.
pub fn cmd_demo(input: &Path, cfg: &PipelineConfig) -> Result<Report> {
    let img = read_image(input)?;
    let stages = enhance_stages(&img, &cfg.enhance)?;
    let dir = &cfg.output_dir;
    let mut written = Vec::new();
    for (label, stage) in stages.labeled() {
        let p = dir.join(format!("{label}.png"));
        write_image(&p, stage)?;
        written.push(p);
    }
    let net = load_network(cfg.reconstruct.checkpoint.as_deref())?;
    let r = reconstruct(&stages.output, &net, None, &cfg.reconstruct)?;
    written.extend(write_reconstruction(dir, DEMO_NAME, &r)?);
    let mut manifest = String::new();
    for p in &written {
        let digest = Sha256::digest(read_bytes(p)?);
        let name = p
            .file_name()
            .map(|n| n.to_string_lossy())
            .unwrap_or_default();
        let _ = writeln!(manifest, "{}  {name}", hex::encode(digest));
    }
    let mp = dir.join(MANIFEST);
    write_bytes(&mp, manifest.as_bytes())?;
    written.push(mp);
    Ok(Report {
        summary: format!("{} files written to {}", written.len(), dir.display()),
        written,
        ..Report::default()
    })
}

/// Fits a pristine model on every image under `input`.
pub fn cmd_fit_model(
    input: &Path,
    kind: ModelKind,
    target: &Path,
    niqe: &NiqeConfig,
    cfg: &PipelineConfig,
) -> Result<Report> {
    let (files, skipped) = list_inputs(input)?;
    let images = run_pooled(cfg, &files, |p| read_image(p))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let model = fit_pristine_model(&images, kind, niqe)?;
    write_bytes(target, &encode_model(&model))?;
    Ok(Report {
        written: vec![target.to_path_buf()],
        warnings: skipped
            .iter()
            .map(|p| format!("skipping {}: not a PGM, PPM or PNG file", p.display()))
            .collect(),
        failures: Vec::new(),
        summary: format!(
            "fitted a {}-dimensional model on {} images",
            model.feature_dim(),
            images.len()
        ),
    })
}
