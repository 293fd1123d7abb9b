//! Binary model and checkpoint files plus filesystem helpers.
//!
//! Quality model (`TQM1`), all little-endian:
//!
//! ```text
//! b"TQM1"  u32 dim  f64 mean[dim]  f64 covariance[dim * dim] (row-major)
//! ```
//!
//! Network checkpoint (`TPRN`), all little-endian:
//!
//! ```text
//! b"TPRN"
//! u32 input_size  u32 in_channels  u32 kernel  u32 stem_channels
//! u32 encoder_len  (u32 channels, u32 stride) * encoder_len
//! u32 decoder_len  (u32 channels, u32 stride) * decoder_len
//! u64 param_count  f32 params[param_count]   (layer order)
//! ```

use std::fs;
use std::path::Path;

use thermoface_core::posmap::{export_obj, import_obj, FaceMesh};
use thermoface_core::quality::{ModelKind, QualityModel};
use thermoface_core::regressor::{Network, NetworkSpec, Stage};
use thermoface_core::Image;

use crate::codec::{load_image, save_image, ImageFormat};
use crate::error::{Error, Result};

const MODEL_MAGIC: &[u8; 4] = b"TQM1";
const CHECKPOINT_MAGIC: &[u8; 4] = b"TPRN";

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], magic: &[u8; 4], what: &'static str) -> Result<Self> {
        if bytes.get(..4) != Some(magic.as_slice()) {
            return Err(Error::File(format!("{what}: bad magic")));
        }
        Ok(Self {
            bytes,
            pos: 4,
            what,
        })
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let out = self
            .bytes
            .get(self.pos..self.pos + N)
            .ok_or_else(|| Error::File(format!("{}: truncated", self.what)))?;
        self.pos += N;
        Ok(out.try_into().expect("slice has length N"))
    }

    fn u32(&mut self) -> Result<u32> {
        self.take().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64> {
        self.take().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64> {
        self.take().map(f64::from_le_bytes)
    }

    fn f32(&mut self) -> Result<f32> {
        self.take().map(f32::from_le_bytes)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn finish(self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::File(format!("{}: trailing bytes", self.what)));
        }
        Ok(())
    }
}

pub fn encode_model(model: &QualityModel) -> Vec<u8> {
    let dim = model.feature_dim();
    let mut out = Vec::with_capacity(8 + 8 * dim * (dim + 1));
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for v in model.mean().iter().chain(model.covariance()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// The file does not record which metric it belongs to, so the caller says.
pub fn decode_model(bytes: &[u8], kind: ModelKind) -> Result<QualityModel> {
    let mut r = Reader::new(bytes, MODEL_MAGIC, "quality model")?;
    let dim = r.u32()? as usize;
    let expected = dim
        .checked_mul(dim + 1)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::File("quality model: dimension overflow".into()))?;
    if r.remaining() != expected {
        return Err(Error::File(format!(
            "quality model: {} payload bytes for dimension {dim}, expected {expected}",
            r.remaining()
        )));
    }
    let mean = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let cov = (0..dim * dim)
        .map(|_| r.f64())
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(QualityModel::new(kind, mean, cov)?)
}

fn push_stages(out: &mut Vec<u8>, stages: &[Stage]) {
    out.extend_from_slice(&(stages.len() as u32).to_le_bytes());
    for s in stages {
        out.extend_from_slice(&(s.channels as u32).to_le_bytes());
        out.extend_from_slice(&(s.stride as u32).to_le_bytes());
    }
}

fn read_stages(r: &mut Reader) -> Result<Vec<Stage>> {
    let n = r.u32()? as usize;
    if n > 1024 {
        return Err(Error::File("checkpoint: implausible stage count".into()));
    }
    (0..n)
        .map(|_| {
            Ok(Stage {
                channels: r.u32()? as usize,
                stride: r.u32()? as usize,
            })
        })
        .collect()
}

/// Parameters are stored as `f32`, so a load rounds them.
pub fn encode_checkpoint(net: &Network) -> Vec<u8> {
    let spec = net.spec();
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    for v in [
        spec.input_size,
        spec.in_channels,
        spec.kernel,
        spec.stem_channels,
    ] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    push_stages(&mut out, &spec.encoder);
    push_stages(&mut out, &spec.decoder);
    out.extend_from_slice(&(net.param_count() as u64).to_le_bytes());
    for &p in net.params() {
        out.extend_from_slice(&(p as f32).to_le_bytes());
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Network> {
    let mut r = Reader::new(bytes, CHECKPOINT_MAGIC, "checkpoint")?;
    let input_size = r.u32()? as usize;
    let in_channels = r.u32()? as usize;
    let kernel = r.u32()? as usize;
    let stem_channels = r.u32()? as usize;
    let encoder = read_stages(&mut r)?;
    let decoder = read_stages(&mut r)?;
    let spec = NetworkSpec {
        input_size,
        in_channels,
        kernel,
        stem_channels,
        encoder,
        decoder,
    };
    spec.validate()?;
    let count = r.u64()?;
    if count != spec.param_count() as u64 {
        return Err(Error::File(format!(
            "checkpoint: {count} parameters but the spec needs {}",
            spec.param_count()
        )));
    }
    if r.remaining() as u64 != 4 * count {
        return Err(Error::File(
            "checkpoint: parameter block size mismatch".into(),
        ));
    }
    let params = (0..count)
        .map(|_| r.f32().map(f64::from))
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(Network::from_params(spec, params)?)
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_image(path: &Path) -> Result<Image> {
    load_image(&read_bytes(path)?).map_err(|source| Error::Format {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes in the format named by the extension, PNG when there is none.
pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    let format = ImageFormat::from_path(path).unwrap_or(ImageFormat::Png);
    let bytes = save_image(img, format).map_err(|source| Error::Format {
        path: path.to_path_buf(),
        source,
    })?;
    write_bytes(path, &bytes)
}

pub fn read_obj(path: &Path) -> Result<FaceMesh> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::File(format!("{}: OBJ is not UTF-8", path.display())))?;
    Ok(import_obj(&text)?)
}

pub fn write_obj(path: &Path, mesh: &FaceMesh) -> Result<()> {
    write_bytes(path, export_obj(mesh).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trip() {
        let m =
            QualityModel::new(ModelKind::Niqe, vec![1.0, -2.5], vec![2.0, 0.5, 0.5, 1.0]).unwrap();
        let bytes = encode_model(&m);
        assert_eq!(&bytes[..8], b"TQM1\x02\x00\x00\x00");
        assert_eq!(bytes.len(), 8 + 6 * 8);
        assert_eq!(decode_model(&bytes, ModelKind::Niqe).unwrap(), m);
        assert!(decode_model(&bytes[..20], ModelKind::Niqe).is_err());
        assert!(decode_model(b"TQM2\x00\x00\x00\x00", ModelKind::Niqe).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let net = Network::new(NetworkSpec::tiny(), 3).unwrap();
        let bytes = encode_checkpoint(&net);
        let back = decode_checkpoint(&bytes).unwrap();
        assert_eq!(back.spec(), net.spec());
        for (a, b) in back.params().iter().zip(net.params()) {
            assert_eq!(*a, f64::from(*b as f32));
        }
        // a second pass is lossless
        assert_eq!(encode_checkpoint(&back), bytes);
        assert!(decode_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        let mut wrong = bytes.clone();
        wrong[4] = 9;
        assert!(decode_checkpoint(&wrong).is_err());
    }
}
