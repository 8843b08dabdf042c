//! On-disk formats for system matrices and projection vectors.
//!
//! System matrix (`SRSM`): magic, `u32 m`, `u32 n`, then per row `u32 nnz`
//! followed by `nnz` pairs of `(u32 index, f64 weight)`. All little-endian.
//!
//! Projections: raw little-endian `f64` array, with a JSON sidecar next to it
//! describing the acquisition.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ParallelGeometry, SparseRow};
use crate::error::{Error, Result};

const MATRIX_MAGIC: &[u8; 4] = b"SRSM";

/// Acquisition metadata stored alongside a projection vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMeta {
    pub m: usize,
    pub views: usize,
    pub rays_per_view: usize,
    pub angle_step_deg: f64,
    pub noise_variance: f64,
    pub seed: u64,
    pub angle_start_deg: f64,
    pub offset_min: f64,
    pub offset_max: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
}

impl ProjectionMeta {
    pub fn geometry(&self) -> ParallelGeometry {
        ParallelGeometry {
            views: self.views,
            angle_start_deg: self.angle_start_deg,
            angle_step_deg: self.angle_step_deg,
            rays_per_view: self.rays_per_view,
            offset_min: self.offset_min,
            offset_max: self.offset_max,
        }
    }
}

/// `proj.bin` -> `proj.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_projections(path: &Path, b: &[f64], meta: &ProjectionMeta) -> Result<()> {
    if meta.m != b.len() {
        return Err(Error::DimensionMismatch {
            expected: meta.m,
            actual: b.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    for v in b {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let mut json = serde_json::to_string_pretty(meta)?;
    json.push('\n');
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn read_projections(path: &Path) -> Result<(Vec<f64>, ProjectionMeta)> {
    let meta: ProjectionMeta = serde_json::from_slice(&std::fs::read(sidecar_path(path))?)?;
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 || bytes.len() / 8 != meta.m {
        return Err(Error::MalformedFile(format!(
            "projection payload has {} bytes, sidecar declares m = {}",
            bytes.len(),
            meta.m
        )));
    }
    let b = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((b, meta))
}

pub fn write_system_matrix(path: &Path, rows: &[SparseRow], num_pixels: usize) -> Result<()> {
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| Error::MalformedFile(format!("{v} does not fit in u32")));
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&to_u32(rows.len())?.to_le_bytes())?;
    w.write_all(&to_u32(num_pixels)?.to_le_bytes())?;
    for row in rows {
        w.write_all(&to_u32(row.nnz())?.to_le_bytes())?;
        for (j, weight) in row.iter() {
            w.write_all(&to_u32(j)?.to_le_bytes())?;
            w.write_all(&weight.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(f64::from_le_bytes(buf))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::MalformedFile("unexpected end of file".into())
    } else {
        Error::Io(e)
    }
}

/// Returns the rows and the declared pixel count.
pub fn read_system_matrix(path: &Path) -> Result<(Vec<SparseRow>, usize)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::MalformedFile("bad system matrix magic".into()));
    }
    let m = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let mut rows = Vec::with_capacity(m.min(1 << 20));
    for _ in 0..m {
        let nnz = read_u32(&mut r)? as usize;
        let mut indices = Vec::with_capacity(nnz.min(n));
        let mut weights = Vec::with_capacity(nnz.min(n));
        for _ in 0..nnz {
            indices.push(read_u32(&mut r)? as usize);
            weights.push(read_f64(&mut r)?);
        }
        if indices.last().is_some_and(|&j| j >= n) {
            return Err(Error::MalformedFile("row index exceeds declared column count".into()));
        }
        let row = SparseRow::new(indices, weights).map_err(|e| Error::MalformedFile(format!("invalid row: {e}")))?;
        rows.push(row);
    }
    Ok((rows, n))
}
