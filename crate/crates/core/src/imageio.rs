//! Binary PGM (P5), PPM (P6) and the lossless `F64M` float format.
//!
//! 8-bit samples map to `[0, 1]` by `v / 255` on load and back by
//! `round(clamp(v, 0, 1) · 255)` on save. `F64M` stores values verbatim:
//!
//! ```text
//! "F64M" | channels: u8 | width: u32 LE | height: u32 LE | planes of f64 LE, row-major
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;

pub const F64M_MAGIC: &[u8; 4] = b"F64M";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelFormat {
    /// Binary graymap, one channel.
    Pgm,
    /// Binary pixmap, three interleaved channels.
    Ppm,
    /// Lossless f64 planes, one or three channels.
    F64m,
}

impl PixelFormat {
    /// Guess from a file extension (`pgm`, `ppm`, `f64m`).
    pub fn from_path(path: impl AsRef<Path>) -> Option<Self> {
        let ext = path.as_ref().extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(Self::Pgm),
            "ppm" => Some(Self::Ppm),
            "f64m" => Some(Self::F64m),
            _ => None,
        }
    }

    /// The 8-bit format matching a channel count.
    pub fn eight_bit_for(channels: usize) -> Self {
        if channels == 3 {
            Self::Ppm
        } else {
            Self::Pgm
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedImage {
    pub channels: Vec<ImageMatrix>,
    pub format: PixelFormat,
}

pub fn load(path: impl AsRef<Path>) -> Result<LoadedImage> {
    decode(&fs::read(path)?)
}

pub fn save(channels: &[ImageMatrix], format: PixelFormat, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode(channels, format)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn decode(bytes: &[u8]) -> Result<LoadedImage> {
    match bytes.get(..2) {
        Some(b"P5") => decode_pnm(bytes, 1).map(|c| LoadedImage { channels: c, format: PixelFormat::Pgm }),
        Some(b"P6") => decode_pnm(bytes, 3).map(|c| LoadedImage { channels: c, format: PixelFormat::Ppm }),
        _ if bytes.starts_with(F64M_MAGIC) => {
            decode_f64m(bytes).map(|c| LoadedImage { channels: c, format: PixelFormat::F64m })
        }
        _ => Err(Error::format("unknown image magic")),
    }
}

pub fn encode(channels: &[ImageMatrix], format: PixelFormat) -> Result<Vec<u8>> {
    let first = channels.first().ok_or(Error::ChannelCount { expected: 1, actual: 0 })?;
    for c in channels {
        c.ensure_same_shape(first, "image channels")?;
    }
    let expected = match format {
        PixelFormat::Pgm => 1,
        PixelFormat::Ppm => 3,
        PixelFormat::F64m if channels.len() == 1 || channels.len() == 3 => channels.len(),
        PixelFormat::F64m => 1,
    };
    if channels.len() != expected {
        return Err(Error::ChannelCount { expected, actual: channels.len() });
    }
    let (height, width) = first.shape();
    let mut out = Vec::new();
    match format {
        PixelFormat::Pgm | PixelFormat::Ppm => {
            let magic = if format == PixelFormat::Pgm { "P5" } else { "P6" };
            out.extend_from_slice(format!("{magic}\n{width} {height}\n255\n").as_bytes());
            out.reserve(width * height * expected);
            for k in 0..width * height {
                for c in channels {
                    out.push(to_byte(c.as_slice()[k]));
                }
            }
        }
        PixelFormat::F64m => {
            out.extend_from_slice(F64M_MAGIC);
            out.push(channels.len() as u8);
            out.extend_from_slice(&(width as u32).to_le_bytes());
            out.extend_from_slice(&(height as u32).to_le_bytes());
            for c in channels {
                for v in c.as_slice() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
    Ok(out)
}

/// `round(clamp(v, 0, 1) · 255)`, halves rounding up.
pub fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Round-trip through 8-bit storage without touching disk.
pub fn quantize_8bit(img: &ImageMatrix) -> ImageMatrix {
    img.map(|v| to_byte(v) as f64 / 255.0)
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(format!("PNM header: missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(format!("PNM header: bad {what}")))
    }
}

fn decode_pnm(bytes: &[u8], channels: usize) -> Result<Vec<ImageMatrix>> {
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::format(format!("PNM maxval {maxval} unsupported (only 255)")));
    }
    if width == 0 || height == 0 {
        return Err(Error::format("PNM image has zero size"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format("PNM header not terminated"));
    }
    let raster = &bytes[cur.pos + 1..];
    let need = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(channels))
        .ok_or_else(|| Error::format("PNM dimensions overflow"))?;
    if raster.len() < need {
        return Err(Error::format(format!("PNM payload truncated: {} of {need} bytes", raster.len())));
    }
    if raster.len() > need {
        return Err(Error::format(format!("{} trailing bytes after PNM raster", raster.len() - need)));
    }
    Ok((0..channels)
        .map(|c| {
            let data = raster.iter().skip(c).step_by(channels).map(|&b| b as f64 / 255.0).collect();
            ImageMatrix::from_vec(height, width, data).expect("sizes checked")
        })
        .collect())
}

fn decode_f64m(bytes: &[u8]) -> Result<Vec<ImageMatrix>> {
    const HEADER: usize = 13;
    if bytes.len() < HEADER {
        return Err(Error::format("F64M header truncated"));
    }
    let channels = bytes[4] as usize;
    if channels != 1 && channels != 3 {
        return Err(Error::format(format!("F64M channel count {channels}")));
    }
    let width = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    if width == 0 || height == 0 {
        return Err(Error::format("F64M image has zero size"));
    }
    let plane = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(8))
        .ok_or_else(|| Error::format("F64M dimensions overflow"))?;
    let need = plane * channels;
    let payload = &bytes[HEADER..];
    if payload.len() < need {
        return Err(Error::format(format!("F64M payload truncated: {} of {need} bytes", payload.len())));
    }
    if payload.len() > need {
        return Err(Error::format(format!("{} trailing bytes after F64M payload", payload.len() - need)));
    }
    payload
        .chunks_exact(plane)
        .map(|p| {
            let data = p.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
            ImageMatrix::from_vec(height, width, data).map_err(|e| Error::format(format!("F64M payload: {e}")))
        })
        .collect()
}
