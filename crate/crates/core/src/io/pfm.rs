//! Portable float maps: `Pf` (one channel) and `PF` (three channels), rows
//! stored bottom to top. Written little-endian as 32-bit floats.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{DepthMap, Point, XyzMap};

/// Sentinel stored for invalid depth pixels.
pub const DEPTH_SENTINEL: f32 = f32::NEG_INFINITY;

struct Header {
    channels: usize,
    width: usize,
    height: usize,
    little_endian: bool,
    offset: usize,
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    // magic, width, height, scale separated by whitespace; one whitespace
    // byte ends the header
    let mut tokens = Vec::with_capacity(4);
    let mut i = 0;
    while tokens.len() < 4 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i || i >= bytes.len() {
            return Err(malformed(path, "header ended early"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..i]).map_err(|_| malformed(path, "non-ASCII header"))?);
    }
    let channels = match tokens[0] {
        "Pf" => 1,
        "PF" => 3,
        m => return Err(malformed(path, format!("unknown magic '{m}'"))),
    };
    let dim = |s: &str, name: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| malformed(path, format!("bad {name} '{s}'")))
    };
    let width = dim(tokens[1], "width")?;
    let height = dim(tokens[2], "height")?;
    let scale: f64 = tokens[3]
        .parse()
        .ok()
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| malformed(path, format!("bad scale '{}'", tokens[3])))?;
    Ok(Header {
        channels,
        width,
        height,
        little_endian: scale < 0.0,
        offset: i + 1,
    })
}

/// Decodes raw samples into image row order (top row first).
fn decode(bytes: &[u8], path: &Path, channels: usize) -> Result<(usize, usize, Vec<f32>)> {
    let h = parse_header(bytes, path)?;
    if h.channels != channels {
        return Err(malformed(
            path,
            format!("expected {channels}-channel map, found {} channels", h.channels),
        ));
    }
    let n = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| malformed(path, "dimensions overflow"))?;
    let payload = &bytes[h.offset.min(bytes.len())..];
    if payload.len() < n * 4 {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected: n * 4,
            found: payload.len(),
        });
    }
    let row = h.width * channels;
    let mut out = vec![0f32; n];
    for (k, chunk) in payload[..n * 4].chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let x = if h.little_endian {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let (file_row, col) = (k / row, k % row);
        out[(h.height - 1 - file_row) * row + col] = x;
    }
    Ok((h.width, h.height, out))
}

fn encode(magic: &str, width: usize, height: usize, channels: usize, samples: &[f32]) -> Vec<u8> {
    let header = format!("{magic}\n{width} {height}\n-1.0\n");
    let mut out = Vec::with_capacity(header.len() + samples.len() * 4);
    out.extend_from_slice(header.as_bytes());
    let row = width * channels;
    for r in (0..height).rev() {
        for x in &samples[r * row..(r + 1) * row] {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn to_f32(x: f64, u: usize, v: usize) -> Result<f32> {
    let y = x as f32;
    if !y.is_finite() {
        return Err(Error::InvalidValue {
            u,
            v,
            reason: "value exceeds 32-bit float range",
        });
    }
    Ok(y)
}

pub fn encode_depth_pfm(map: &DepthMap) -> Result<Vec<u8>> {
    let (w, h) = map.dims();
    let mut samples = Vec::with_capacity(w * h);
    for i in 0..w * h {
        samples.push(match map.at(i) {
            Some(z) => {
                let y = to_f32(z, i % w, i / w)?;
                if y <= 0.0 {
                    return Err(Error::InvalidValue {
                        u: i % w,
                        v: i / w,
                        reason: "depth underflows 32-bit float",
                    });
                }
                y
            }
            None => DEPTH_SENTINEL,
        });
    }
    Ok(encode("Pf", w, h, 1, &samples))
}

/// Decodes a one-channel map; non-positive or non-finite samples are invalid.
pub fn decode_depth_pfm(bytes: &[u8], path: &Path) -> Result<DepthMap> {
    let (w, h, samples) = decode(bytes, path, 1)?;
    let valid: Vec<bool> = samples.iter().map(|&z| z.is_finite() && z > 0.0).collect();
    DepthMap::new(w, h, samples.into_iter().map(f64::from).collect(), valid)
}

pub fn encode_xyz_pfm(map: &XyzMap) -> Result<Vec<u8>> {
    let (w, h) = map.dims();
    let mut samples = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        match map.at(i) {
            Some(p) => {
                for c in p {
                    samples.push(to_f32(c, i % w, i / w)?);
                }
            }
            None => samples.extend([f32::NAN; 3]),
        }
    }
    Ok(encode("PF", w, h, 3, &samples))
}

/// Decodes a three-channel map; a pixel with any non-finite channel is invalid.
pub fn decode_xyz_pfm(bytes: &[u8], path: &Path) -> Result<XyzMap> {
    let (w, h, samples) = decode(bytes, path, 3)?;
    let mut coords = Vec::with_capacity(w * h);
    let mut valid = Vec::with_capacity(w * h);
    for c in samples.chunks_exact(3) {
        let p: Point = [c[0].into(), c[1].into(), c[2].into()];
        valid.push(p.iter().all(|x| x.is_finite()));
        coords.push(p);
    }
    XyzMap::new(w, h, coords, valid)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_depth_pfm(path: impl AsRef<Path>, map: &DepthMap) -> Result<()> {
    write_bytes(path.as_ref(), &encode_depth_pfm(map)?)
}

pub fn read_depth_pfm(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    decode_depth_pfm(&read_bytes(path)?, path)
}

pub fn write_xyz_pfm(path: impl AsRef<Path>, map: &XyzMap) -> Result<()> {
    write_bytes(path.as_ref(), &encode_xyz_pfm(map)?)
}

pub fn read_xyz_pfm(path: impl AsRef<Path>) -> Result<XyzMap> {
    let path = path.as_ref();
    decode_xyz_pfm(&read_bytes(path)?, path)
}
