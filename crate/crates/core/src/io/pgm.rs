//! Binary PGM (`P5`, maxval 255) masks: 0 background, 255 object.

use std::fs;
use std::path::Path;

use super::pfm::write_bytes;
use crate::error::{Error, Result};
use crate::geometry::SegMask;

/// Gray levels at or above this read as set.
pub const MASK_THRESHOLD: u8 = 128;

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn encode_pgm(mask: &SegMask) -> Vec<u8> {
    let (w, h) = mask.dims();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(mask.values().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Header tokens may be separated by whitespace and `#` comments.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<SegMask> {
    let mut tokens = Vec::with_capacity(4);
    let mut i = 0;
    while tokens.len() < 4 {
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                break;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i || i >= bytes.len() {
            return Err(malformed(path, "header ended early"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    if tokens[0] != "P5" {
        return Err(malformed(path, format!("unknown magic '{}'", tokens[0])));
    }
    let num = |s: &str, name: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| malformed(path, format!("bad {name} '{s}'")))
    };
    let width = num(&tokens[1], "width")?;
    let height = num(&tokens[2], "height")?;
    let maxval = num(&tokens[3], "maxval")?;
    if maxval != 255 {
        return Err(malformed(path, format!("maxval {maxval} unsupported, expected 255")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| malformed(path, "dimensions overflow"))?;
    let payload = &bytes[i + 1..];
    if payload.len() < n {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected: n,
            found: payload.len(),
        });
    }
    SegMask::new(width, height, payload[..n].iter().map(|&g| g >= MASK_THRESHOLD).collect())
}

pub fn write_pgm(path: impl AsRef<Path>, mask: &SegMask) -> Result<()> {
    write_bytes(path.as_ref(), &encode_pgm(mask))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<SegMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}
