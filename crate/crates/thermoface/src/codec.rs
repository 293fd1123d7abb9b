//! 8-bit PGM (P5), PPM (P6) and PNG codecs.
//!
//! Samples are mapped to `[0, 1]` by `/255` on load and back by
//! `round(255·v)` with clamping on save.

use std::io::Cursor;
use std::path::Path;

use thermoface_core::Image;

use crate::error::FormatError;

/// Largest accepted `width × height × channels`.
pub const MAX_SAMPLES: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Ppm,
    Png,
}

impl ImageFormat {
    /// Format implied by a file extension, case-insensitively.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(Self::Pgm),
            "ppm" => Some(Self::Ppm),
            "png" => Some(Self::Png),
            _ => None,
        }
    }

    /// PGM/PPM follow the channel count; PNG stores either.
    pub fn for_channels(self, channels: usize) -> Self {
        match (self, channels) {
            (Self::Pgm | Self::Ppm, 1) => Self::Pgm,
            (Self::Pgm | Self::Ppm, _) => Self::Ppm,
            (Self::Png, _) => Self::Png,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Pgm => "pgm",
            Self::Ppm => "ppm",
            Self::Png => "png",
        }
    }
}

fn check_size(width: u64, height: u64, channels: u64) -> Result<usize, FormatError> {
    match width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
    {
        Some(n) if n <= MAX_SAMPLES && width > 0 && height > 0 => Ok(n as usize),
        Some(_) if width == 0 || height == 0 => Err(FormatError::Header("zero dimension")),
        _ => Err(FormatError::DimensionOverflow { width, height }),
    }
}

fn interleaved_to_image(
    width: usize,
    height: usize,
    channels: usize,
    bytes: &[u8],
) -> Result<Image, FormatError> {
    let n = width * height;
    let mut data = vec![0.0; n * channels];
    for (i, px) in bytes.chunks_exact(channels).enumerate() {
        for (c, &b) in px.iter().enumerate() {
            data[c * n + i] = f64::from(b) / 255.0;
        }
    }
    Image::from_planar(width, height, channels, data)
        .map_err(|_| FormatError::Header("invalid geometry"))
}

fn image_to_interleaved(img: &Image) -> Vec<u8> {
    let (n, ch) = (img.pixel_count(), img.channels());
    let mut out = vec![0; n * ch];
    for c in 0..ch {
        for (i, &v) in img.plane(c).iter().enumerate() {
            out[i * ch + c] = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        }
    }
    out
}

/// Reads one whitespace-delimited header token, skipping `#` comments.
fn netpbm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], FormatError> {
    loop {
        match bytes.get(*pos) {
            None => return Err(FormatError::Truncated),
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn netpbm_number(bytes: &[u8], pos: &mut usize) -> Result<u64, FormatError> {
    let tok = netpbm_token(bytes, pos)?;
    if tok.is_empty() || !tok.iter().all(u8::is_ascii_digit) {
        return Err(FormatError::Header("expected a decimal number"));
    }
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(FormatError::DimensionOverflow {
            width: u64::MAX,
            height: u64::MAX,
        })
}

fn decode_netpbm(bytes: &[u8], channels: usize) -> Result<Image, FormatError> {
    let mut pos = 2;
    let width = netpbm_number(bytes, &mut pos)?;
    let height = netpbm_number(bytes, &mut pos)?;
    let maxval = netpbm_number(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(FormatError::Unsupported(format!("maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(FormatError::Header("missing separator after maxval")),
        None => return Err(FormatError::Truncated),
    }
    let n = check_size(width, height, channels as u64)?;
    let raster = bytes.get(pos..pos + n).ok_or(FormatError::Truncated)?;
    interleaved_to_image(width as usize, height as usize, channels, raster)
}

fn decode_png(bytes: &[u8]) -> Result<Image, FormatError> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(png_error)?;
    let info = reader.info();
    if info.interlaced {
        return Err(FormatError::Unsupported("interlaced PNG".into()));
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(FormatError::Unsupported(format!(
            "{}-bit PNG",
            info.bit_depth as u8
        )));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(FormatError::Unsupported(format!(
                "PNG color type {other:?}"
            )))
        }
    };
    let (width, height) = (info.width, info.height);
    let n = check_size(width.into(), height.into(), channels as u64)?;
    let mut buf = vec![0; n];
    reader.next_frame(&mut buf).map_err(png_error)?;
    interleaved_to_image(width as usize, height as usize, channels, &buf)
}

fn png_error(e: png::DecodingError) -> FormatError {
    match e {
        png::DecodingError::IoError(_) => FormatError::Truncated,
        png::DecodingError::LimitsExceeded => FormatError::DimensionOverflow {
            width: u64::MAX,
            height: u64::MAX,
        },
        other => FormatError::Unsupported(format!("PNG: {other}")),
    }
}

/// Decodes PGM, PPM or PNG, recognised by magic bytes.
pub fn load_image(bytes: &[u8]) -> Result<Image, FormatError> {
    match bytes {
        [] | [b'P'] => Err(FormatError::Truncated),
        [b'P', b'5', ..] => decode_netpbm(bytes, 1),
        [b'P', b'6', ..] => decode_netpbm(bytes, 3),
        [0x89, b'P', b'N', b'G', ..] => decode_png(bytes),
        b if b.len() < 8 && [0x89, b'P', b'N', b'G', 13, 10, 26, 10].starts_with(b) => {
            Err(FormatError::Truncated)
        }
        _ => Err(FormatError::Unsupported("unknown magic bytes".into())),
    }
}

/// Encodes with the canonical `P5\n<w> <h>\n255\n` style header for
/// netpbm formats.
pub fn save_image(img: &Image, format: ImageFormat) -> Result<Vec<u8>, FormatError> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let raster = image_to_interleaved(img);
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => {
            let (magic, want, name) = match format {
                ImageFormat::Pgm => ("P5", 1, "PGM"),
                _ => ("P6", 3, "PPM"),
            };
            if ch != want {
                return Err(FormatError::ChannelCount {
                    format: name,
                    channels: ch,
                });
            }
            let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&raster);
            Ok(out)
        }
        ImageFormat::Png => {
            let mut out = Vec::new();
            let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
            enc.set_color(if ch == 1 {
                png::ColorType::Grayscale
            } else {
                png::ColorType::Rgb
            });
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc
                .write_header()
                .map_err(|e| FormatError::Unsupported(format!("PNG: {e}")))?;
            writer
                .write_image_data(&raster)
                .map_err(|e| FormatError::Unsupported(format!("PNG: {e}")))?;
            writer
                .finish()
                .map_err(|e| FormatError::Unsupported(format!("PNG: {e}")))?;
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_values() {
        let bytes = b"P5\n2 2\n255\n\x00\x80\xff\x40";
        let img = load_image(bytes).unwrap();
        assert_eq!(img.data(), &[0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0]);
        assert_eq!(save_image(&img, ImageFormat::Pgm).unwrap(), bytes);
    }

    #[test]
    fn header_comments_and_errors() {
        let img = load_image(b"P5 # c\n1 # w\n1\n255 \x07").unwrap();
        assert_eq!(img.data(), &[7.0 / 255.0]);
        assert_eq!(load_image(b""), Err(FormatError::Truncated));
        assert_eq!(
            load_image(b"P5\n2 2\n255\n\x00"),
            Err(FormatError::Truncated)
        );
        assert!(matches!(
            load_image(b"P5\n99999999 99999999\n255\n"),
            Err(FormatError::DimensionOverflow { .. })
        ));
        assert!(matches!(
            load_image(b"P5\n1 1\n65535\n\x00\x00"),
            Err(FormatError::Unsupported(_))
        ));
        assert!(matches!(
            load_image(b"GIF89a"),
            Err(FormatError::Unsupported(_))
        ));
    }

    #[test]
    fn ppm_and_png_round_trip() {
        let img = Image::from_planar(2, 1, 3, vec![0.0, 1.0, 0.2, 0.4, 0.6, 0.8]).unwrap();
        let quantized = load_image(&save_image(&img, ImageFormat::Ppm).unwrap()).unwrap();
        let png = save_image(&quantized, ImageFormat::Png).unwrap();
        assert_eq!(load_image(&png).unwrap(), quantized);
        let gray = Image::filled(3, 2, 1, 0.5).unwrap();
        let back = load_image(&save_image(&gray, ImageFormat::Png).unwrap()).unwrap();
        assert_eq!(back.channels(), 1);
        assert!(save_image(&gray, ImageFormat::Ppm).is_err());
        assert_eq!(load_image(&png[..5]), Err(FormatError::Truncated));
    }
}
