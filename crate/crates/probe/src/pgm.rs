//! Binary (P5) PGM with 8- or 16-bit samples.

use std::fs;
use std::path::Path;

use crate::error::{ProbeError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

fn bad(path: &Path, message: &str) -> ProbeError {
    ProbeError::BadFile { path: path.to_path_buf(), message: message.into() }
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Pgm> {
    if !bytes.starts_with(b"P5") {
        return Err(bad(path, "not a binary PGM (missing P5 magic)"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(path, "malformed PGM header"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad(path, "malformed PGM header"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad(path, "PGM extents and maxval must be positive (maxval <= 65535)"));
    }
    let wide = maxval > 255;
    let need = width * height * if wide { 2 } else { 1 };
    let body = &bytes[pos..];
    if body.len() < need {
        return Err(ProbeError::TruncatedPayload {
            path: path.to_path_buf(),
            offset: bytes.len() as u64,
            expected: (pos + need) as u64,
        });
    }
    let samples = if wide {
        body[..need].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        body[..need].iter().map(|b| *b as u16).collect()
    };
    Ok(Pgm { width, height, maxval: maxval as u16, samples })
}

pub fn read(path: &Path) -> Result<Pgm> {
    let bytes = fs::read(path).map_err(|e| ProbeError::io(path, e))?;
    decode(&bytes, path)
}

/// Writes 8-bit samples.
pub fn write_u8(path: &Path, width: usize, height: usize, samples: &[u8]) -> Result<()> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(samples);
    fs::write(path, out).map_err(|e| ProbeError::IoFailure { path: path.to_path_buf(), source: e })
}
