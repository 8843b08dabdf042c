//! `SRIM` image files: magic, `u32` rows, `u32` cols, row-major `f64`
//! payload, all little-endian. PGM output is for viewing only.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{Grid, Image};

const IMAGE_MAGIC: &[u8; 4] = b"SRIM";
const HEADER_LEN: usize = 12;

pub fn save_image(image: &Image, path: &Path) -> Result<()> {
    let rows = u32::try_from(image.rows()).map_err(|_| Error::DimensionOverflow {
        rows: image.rows() as u64,
        cols: image.cols() as u64,
    })?;
    let cols = u32::try_from(image.cols()).map_err(|_| Error::DimensionOverflow {
        rows: image.rows() as u64,
        cols: image.cols() as u64,
    })?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(IMAGE_MAGIC)?;
    w.write_all(&rows.to_le_bytes())?;
    w.write_all(&cols.to_le_bytes())?;
    for v in image.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path)?;
    decode(&bytes)
}

fn decode(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedFile("image header truncated".into()));
    }
    if &bytes[..4] != IMAGE_MAGIC {
        return Err(Error::MalformedFile("bad image magic".into()));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as u64;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as u64;
    if rows == 0 || cols == 0 {
        return Err(Error::MalformedFile(format!("empty image dimensions {rows}x{cols}")));
    }
    let payload_len = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or(Error::DimensionOverflow { rows, cols })?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != payload_len {
        return Err(Error::MalformedFile(format!(
            "payload is {} bytes, expected {payload_len} for {rows}x{cols}",
            payload.len()
        )));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let grid = Grid::new(rows as usize, cols as usize)?;
    Image::from_vec(grid, data)
}

/// 8-bit binary PGM with values mapped affinely from `[min, max]`.
pub fn save_pgm(image: &Image, path: &Path) -> Result<()> {
    let (lo, hi) = image.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", image.cols(), image.rows())?;
    let pixels: Vec<u8> = image
        .as_slice()
        .iter()
        .map(|&v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    w.write_all(&pixels)?;
    w.flush()?;
    Ok(())
}
