//! `SVMK` binary encoding of a [`WatermarkKey`].
//!
//! ```text
//! 0..6    magic "SVMK" + version 0x01 0x00
//! 6       channel count (1 or 3)
//! 7       flags, bit 0 = transposed
//! 8..12   m, u32 LE
//! 12..16  n, u32 LE
//! 16..24  lambda, f64 LE
//! then per channel: A_z (m·n), V_z (n·n), A_w (m·n), row-major f64 LE
//! ```
//!
//! `m × n` is the tall (normalized) orientation of the factors.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;
use crate::watermark::{ChannelKey, WatermarkKey};

pub const MAGIC: &[u8; 6] = b"SVMK\x01\x00";
const HEADER_LEN: usize = 24;
const FLAG_TRANSPOSED: u8 = 0x01;

pub fn encode_key(key: &WatermarkKey) -> Vec<u8> {
    let first = &key.channels()[0];
    let (m, n) = first.a_z.shape();
    let per_channel = (2 * m * n + n * n) * 8;
    let mut out = Vec::with_capacity(HEADER_LEN + per_channel * key.channels().len());
    out.extend_from_slice(MAGIC);
    out.push(key.channels().len() as u8);
    out.push(if first.transposed { FLAG_TRANSPOSED } else { 0 });
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&key.lambda().to_le_bytes());
    for c in key.channels() {
        for mat in [&c.a_z, &c.v_z, &c.a_w] {
            for v in mat.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_key(bytes: &[u8]) -> Result<WatermarkKey> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(format!("key truncated: {} bytes, header needs {HEADER_LEN}", bytes.len())));
    }
    if &bytes[..4] != b"SVMK" {
        return Err(Error::format("not an SVMK key (bad magic)"));
    }
    if bytes[4..6] != MAGIC[4..6] {
        return Err(Error::format(format!("unsupported SVMK version {}.{}", bytes[4], bytes[5])));
    }
    let channels = bytes[6] as usize;
    if channels != 1 && channels != 3 {
        return Err(Error::format(format!("SVMK channel count {channels}")));
    }
    let flags = bytes[7];
    if flags & !FLAG_TRANSPOSED != 0 {
        return Err(Error::format(format!("unknown SVMK flags {flags:#04x}")));
    }
    let m = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let lambda = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if m == 0 || n == 0 || m < n {
        return Err(Error::format(format!("SVMK geometry {m}x{n} invalid")));
    }

    let per_channel = (2 * m * n + n * n)
        .checked_mul(8)
        .ok_or_else(|| Error::format("SVMK geometry overflows"))?;
    let expected = per_channel
        .checked_mul(channels)
        .and_then(|p| p.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::format("SVMK geometry overflows"))?;
    if bytes.len() < expected {
        return Err(Error::format(format!("key truncated: {} of {expected} bytes", bytes.len())));
    }
    if bytes.len() > expected {
        return Err(Error::format(format!("{} trailing bytes after key", bytes.len() - expected)));
    }

    let mut cursor = &bytes[HEADER_LEN..];
    let mut take = |rows: usize, cols: usize| -> Result<ImageMatrix> {
        let (head, rest) = cursor.split_at(rows * cols * 8);
        cursor = rest;
        let data = head.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
        ImageMatrix::from_vec(rows, cols, data).map_err(|e| Error::format(format!("key payload: {e}")))
    };
    let mut keys = Vec::with_capacity(channels);
    for _ in 0..channels {
        let a_z = take(m, n)?;
        let v_z = take(n, n)?;
        let a_w = take(m, n)?;
        keys.push(ChannelKey { lambda, a_z, v_z, a_w, transposed: flags & FLAG_TRANSPOSED != 0 });
    }
    WatermarkKey::new(keys)
}

pub fn save_key(key: &WatermarkKey, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_key(key))?;
    Ok(())
}

pub fn load_key(path: impl AsRef<Path>) -> Result<WatermarkKey> {
    decode_key(&fs::read(path)?)
}
