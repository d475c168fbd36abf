//! FTEN v1: a 28-byte little-endian header followed by a dense payload.
//!
//! | offset | field                                   |
//! |--------|-----------------------------------------|
//! | 0      | magic `FTEN`                            |
//! | 4      | u32 version (1)                         |
//! | 8      | u32 dtype (1 = f32, 2 = u16, 3 = u8)    |
//! | 12     | u32 stride                              |
//! | 16     | u32 C                                   |
//! | 20     | u32 H                                   |
//! | 24     | u32 W                                   |
//! | 28     | C*H*W values, channel-major, row-major  |

use std::fs;
use std::path::Path;

use feature_probe_core::{FeatureTensor, LabelMap};

use crate::error::{ProbeError, Result};

pub const MAGIC: &[u8; 4] = b"FTEN";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32 = 1,
    U16 = 2,
    U8 = 3,
}

impl Dtype {
    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::U16 => 2,
            Dtype::U8 => 1,
        }
    }

    fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Dtype::F32),
            2 => Some(Dtype::U16),
            3 => Some(Dtype::U8),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub dtype: Dtype,
    pub stride: u32,
    pub channels: u32,
    pub height: u32,
    pub width: u32,
}

impl Header {
    pub fn values(&self) -> u64 {
        self.channels as u64 * self.height as u64 * self.width as u64
    }
}

/// Decoded payload, kept in its stored type.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    F32(Vec<f32>),
    U16(Vec<u16>),
    U8(Vec<u8>),
}

impl Payload {
    /// Values as f32; integer types are converted exactly.
    pub fn to_f32(&self) -> Vec<f32> {
        match self {
            Payload::F32(v) => v.clone(),
            Payload::U16(v) => v.iter().map(|x| *x as f32).collect(),
            Payload::U8(v) => v.iter().map(|x| *x as f32).collect(),
        }
    }
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4-byte slice"))
}

/// Parses an FTEN byte string. `path` only labels errors.
pub fn decode(bytes: &[u8], path: &Path) -> Result<(Header, Payload)> {
    let p = || path.to_path_buf();
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(ProbeError::BadMagic { path: p(), offset: 0 });
    }
    if bytes.len() < HEADER_LEN {
        return Err(ProbeError::TruncatedPayload {
            path: p(),
            offset: bytes.len() as u64,
            expected: HEADER_LEN as u64,
        });
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(ProbeError::UnsupportedVersion { path: p(), version, offset: 4 });
    }
    let code = u32_at(bytes, 8);
    let dtype = Dtype::from_code(code).ok_or(ProbeError::UnsupportedDtype { path: p(), code, offset: 8 })?;
    let header = Header {
        dtype,
        stride: u32_at(bytes, 12),
        channels: u32_at(bytes, 16),
        height: u32_at(bytes, 20),
        width: u32_at(bytes, 24),
    };
    for (offset, v) in [(16u64, header.channels), (20, header.height), (24, header.width)] {
        if v == 0 {
            return Err(ProbeError::BadHeader { path: p(), offset, message: "zero extent".into() });
        }
    }
    let expected = HEADER_LEN as u64 + header.values() * dtype.width() as u64;
    if (bytes.len() as u64) < expected {
        return Err(ProbeError::TruncatedPayload { path: p(), offset: bytes.len() as u64, expected });
    }
    if (bytes.len() as u64) > expected {
        return Err(ProbeError::BadHeader {
            path: p(),
            offset: expected,
            message: "trailing bytes after payload".into(),
        });
    }
    let body = &bytes[HEADER_LEN..];
    let payload = match dtype {
        Dtype::F32 => {
            let mut out = Vec::with_capacity(header.values() as usize);
            for (i, chunk) in body.chunks_exact(4).enumerate() {
                let v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
                if !v.is_finite() {
                    return Err(ProbeError::NonFiniteValue { path: p(), offset: (HEADER_LEN + 4 * i) as u64 });
                }
                out.push(v);
            }
            Payload::F32(out)
        }
        Dtype::U16 => Payload::U16(body.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect()),
        Dtype::U8 => Payload::U8(body.to_vec()),
    };
    Ok((header, payload))
}

pub fn encode(header: &Header, payload: &Payload) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + header.values() as usize * header.dtype.width());
    out.extend_from_slice(MAGIC);
    for v in [VERSION, header.dtype.code(), header.stride, header.channels, header.height, header.width] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    match payload {
        Payload::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        Payload::U16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        Payload::U8(v) => out.extend_from_slice(v),
    }
    out
}

pub fn read_file(path: &Path) -> Result<(Header, Payload)> {
    let bytes = fs::read(path).map_err(|e| ProbeError::io(path, e))?;
    decode(&bytes, path)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| ProbeError::IoFailure { path: path.to_path_buf(), source: e })
}

fn extent(v: usize, path: &Path) -> Result<u32> {
    u32::try_from(v).map_err(|_| ProbeError::BadFile { path: path.to_path_buf(), message: "extent exceeds u32".into() })
}

pub fn read_feature_tensor(path: &Path) -> Result<FeatureTensor> {
    let (h, payload) = read_file(path)?;
    let data = match payload {
        Payload::F32(v) => v,
        other => other.to_f32(),
    };
    Ok(FeatureTensor::new(h.channels as usize, h.height as usize, h.width as usize, h.stride, data)?)
}

pub fn write_feature_tensor(t: &FeatureTensor, path: &Path) -> Result<()> {
    let header = Header {
        dtype: Dtype::F32,
        stride: t.stride(),
        channels: extent(t.channels(), path)?,
        height: extent(t.height(), path)?,
        width: extent(t.width(), path)?,
    };
    write_file(path, &encode(&header, &Payload::F32(t.data().to_vec())))
}

/// Reads a single-channel u16 (or u8) FTEN file as segment ids.
pub fn read_label_map(path: &Path) -> Result<LabelMap> {
    let (h, payload) = read_file(path)?;
    if h.channels != 1 {
        return Err(ProbeError::BadHeader {
            path: path.to_path_buf(),
            offset: 16,
            message: "label maps have one channel".into(),
        });
    }
    let ids = match payload {
        Payload::U16(v) => v,
        Payload::U8(v) => v.into_iter().map(u16::from).collect(),
        Payload::F32(_) => {
            return Err(ProbeError::UnsupportedDtype { path: path.to_path_buf(), code: Dtype::F32.code(), offset: 8 })
        }
    };
    Ok(LabelMap::new(h.height as usize, h.width as usize, ids)?)
}

pub fn write_label_map(labels: &LabelMap, path: &Path) -> Result<()> {
    let header = Header {
        dtype: Dtype::U16,
        stride: 1,
        channels: 1,
        height: extent(labels.height(), path)?,
        width: extent(labels.width(), path)?,
    };
    write_file(path, &encode(&header, &Payload::U16(labels.ids().to_vec())))
}
