//! Netpbm readers and writers: PGM (P2/P5) and PPM (P3/P6) with
//! `maxval <= 255`, plus the grayscale PFM float format.
//!
//! PPM pixels are reduced to luminance `0.299 R + 0.587 G + 0.114 B`. PFM
//! payloads are 32-bit floats, one channel, stored bottom row first with a
//! negative scale marking little-endian data (the convention this writer
//! emits).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{FbsError, Result};
use crate::image::GrayImage;

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Loads a PGM or PPM image; PPM is converted to grayscale.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|source| FbsError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pnm(&bytes).map_err(|message| FbsError::Format {
        path: path.to_path_buf(),
        message,
    })
}

fn parse_pnm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let magic = bytes.get(0..2).ok_or("missing magic number")?;
    let mut cursor = 2usize;
    let width = next_header_value(bytes, &mut cursor)?;
    let height = next_header_value(bytes, &mut cursor)?;
    let maxval = next_header_value(bytes, &mut cursor)?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval} (expected 1..=255)"));
    }
    if width == 0 || height == 0 {
        return Err("zero image dimension".to_string());
    }
    let pixels = width * height;

    let data = match magic {
        b"P5" => binary_samples(bytes, cursor, pixels)?,
        b"P6" => {
            let rgb = binary_samples(bytes, cursor, pixels * 3)?;
            luminance(&rgb)
        }
        b"P2" => ascii_samples(bytes, cursor, pixels, maxval)?,
        b"P3" => {
            let rgb = ascii_samples(bytes, cursor, pixels * 3, maxval)?;
            luminance(&rgb)
        }
        other => {
            return Err(format!(
                "unsupported magic number {:?}",
                String::from_utf8_lossy(other)
            ))
        }
    };

    GrayImage::from_raw(width, height, data).map_err(|e| e.to_string())
}

/// Reads one whitespace-delimited header integer, skipping `#` comments.
fn next_header_value(bytes: &[u8], cursor: &mut usize) -> std::result::Result<usize, String> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    let start = *cursor;
    while *cursor < bytes.len() && bytes[*cursor].is_ascii_digit() {
        *cursor += 1;
    }
    if start == *cursor {
        return Err("truncated or malformed header".to_string());
    }
    std::str::from_utf8(&bytes[start..*cursor])
        .map_err(|_| "malformed header".to_string())?
        .parse()
        .map_err(|_| "malformed header value".to_string())
}

/// Binary payload: exactly one whitespace byte separates header and samples.
fn binary_samples(
    bytes: &[u8],
    mut cursor: usize,
    count: usize,
) -> std::result::Result<Vec<f64>, String> {
    if cursor < bytes.len() && bytes[cursor].is_ascii_whitespace() {
        cursor += 1;
    } else {
        return Err("missing separator before binary payload".to_string());
    }
    let payload = &bytes[cursor..];
    if payload.len() < count {
        return Err(format!(
            "truncated payload: expected {count} samples, found {}",
            payload.len()
        ));
    }
    Ok(payload[..count].iter().map(|&b| b as f64).collect())
}

fn ascii_samples(
    bytes: &[u8],
    mut cursor: usize,
    count: usize,
    maxval: usize,
) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let value = next_header_value(bytes, &mut cursor)?;
        if value > maxval {
            return Err(format!("sample {value} exceeds maxval {maxval}"));
        }
        out.push(value as f64);
    }
    Ok(out)
}

fn luminance(rgb: &[f64]) -> Vec<f64> {
    rgb.chunks_exact(3)
        .map(|px| LUMA_R * px[0] + LUMA_G * px[1] + LUMA_B * px[2])
        .collect()
}

/// Writes an 8-bit binary PGM (P5).
pub fn write_pgm(path: &Path, width: usize, height: usize, data: &[u8]) -> Result<()> {
    assert_eq!(data.len(), width * height);
    let mut out = Vec::with_capacity(data.len() + 32);
    write!(out, "P5\n{width} {height}\n255\n").expect("in-memory write");
    out.extend_from_slice(data);
    fs::write(path, out).map_err(|source| FbsError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a single-channel PFM: little-endian 32-bit floats, bottom row
/// first, scale -1.0.
pub fn write_pfm(path: &Path, width: usize, height: usize, data: &[f32]) -> Result<()> {
    assert_eq!(data.len(), width * height);
    let mut out = Vec::with_capacity(data.len() * 4 + 32);
    write!(out, "Pf\n{width} {height}\n-1.0\n").expect("in-memory write");
    for v in (0..height).rev() {
        for u in 0..width {
            out.extend_from_slice(&data[v * width + u].to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|source| FbsError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a single-channel PFM, returning samples in top-down row order.
pub fn load_pfm(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let bytes = fs::read(path).map_err(|source| FbsError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pfm(&bytes).map_err(|message| FbsError::Format {
        path: path.to_path_buf(),
        message,
    })
}

fn parse_pfm(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<f32>), String> {
    let magic = bytes.get(0..2).ok_or("missing magic number")?;
    if magic != b"Pf" {
        return Err("unsupported magic number (expected grayscale \"Pf\")".to_string());
    }
    let mut cursor = 2usize;
    let width = next_header_value(bytes, &mut cursor)?;
    let height = next_header_value(bytes, &mut cursor)?;

    // scale line: sign encodes endianness
    while cursor < bytes.len() && bytes[cursor].is_ascii_whitespace() {
        cursor += 1;
    }
    let start = cursor;
    while cursor < bytes.len() && !bytes[cursor].is_ascii_whitespace() {
        cursor += 1;
    }
    let scale: f32 = std::str::from_utf8(&bytes[start..cursor])
        .map_err(|_| "malformed scale".to_string())?
        .parse()
        .map_err(|_| "malformed scale".to_string())?;
    let little_endian = scale < 0.0;
    cursor += 1; // single separator byte

    let count = width * height;
    let payload = bytes
        .get(cursor..cursor + count * 4)
        .ok_or("truncated payload")?;

    let mut rows: Vec<f32> = Vec::with_capacity(count);
    for chunk in payload.chunks_exact(4) {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        rows.push(if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        });
    }
    // stored bottom-up; flip to top-down
    let mut data = Vec::with_capacity(count);
    for v in (0..height).rev() {
        data.extend_from_slice(&rows[v * width..(v + 1) * width]);
    }
    Ok((width, height, data))
}
