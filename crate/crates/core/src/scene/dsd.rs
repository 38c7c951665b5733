//! `.dsd` depth files: `"DSDM"`, little-endian `u32` width and height, then
//! `width * height` little-endian `f32` values, row-major top to bottom.
//! NaN marks an invalid pixel.

use super::DepthMap;

pub const MAGIC: &[u8; 4] = b"DSDM";
const HEADER_LEN: usize = 12;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DsdError {
    #[error("bad magic bytes (expected \"DSDM\")")]
    BadMagic,
    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} trailing bytes after depth payload")]
    TrailingBytes(usize),
}

/// Encodes a depth map. Pixels with `validity == false` are written as NaN;
/// NaNs already present keep their bit pattern.
pub fn encode(depth: &DepthMap, validity: Option<&[bool]>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + depth.data.len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&depth.width.to_le_bytes());
    out.extend_from_slice(&depth.height.to_le_bytes());
    for (i, d) in depth.data.iter().enumerate() {
        let valid = validity.map_or(true, |v| v[i]);
        let value = if valid || d.is_nan() { *d } else { f32::NAN };
        out.extend_from_slice(&value.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<DepthMap, DsdError> {
    if bytes.len() < HEADER_LEN {
        return Err(DsdError::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(DsdError::BadMagic);
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let n = width as usize * height as usize;
    let expected = HEADER_LEN + n * 4;
    if bytes.len() < expected {
        return Err(DsdError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(DsdError::TrailingBytes(bytes.len() - expected));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DepthMap::new(width, height, data))
}
