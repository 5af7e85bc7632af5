//! Binary containers: NFSI complex images, NFBK mask banks, NFCK network
//! checkpoints, plus dB-magnitude PGM export.
//!
//! NFSI layout: magic "NFSI", version u16, rows u32, cols u32, dx f64,
//! dy f64, origin f64 x2, then rows*cols little-endian f64 pairs (re, im),
//! row-major. Round trips are bit exact.

use crate::image::{ComplexImage, ImageGrid};
use crate::spectral::BlockMaskBank;
use ndarray::Array2;
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const IMAGE_MAGIC: &[u8; 4] = b"NFSI";
pub const BANK_MAGIC: &[u8; 4] = b"NFBK";
pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NFCK";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("bad magic (expected {expected:?})")]
    BadMagic { expected: String },
    #[error("unsupported format version {0}")]
    BadVersion(u16),
    #[error("header inconsistent with payload length")]
    Truncated,
    #[error("invalid grid in header: {0}")]
    BadGrid(String),
    #[error("invalid header json: {0}")]
    BadHeader(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn write_f64<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, ContainerError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|_| ContainerError::Truncated)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, ContainerError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|_| ContainerError::Truncated)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn write_image(path: &Path, img: &ComplexImage) -> Result<(), ContainerError> {
    let mut buf = Vec::with_capacity(32 + img.data.len() * 16);
    buf.extend_from_slice(IMAGE_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(img.grid.ny as u32).to_le_bytes());
    buf.extend_from_slice(&(img.grid.nx as u32).to_le_bytes());
    for v in [
        img.grid.dx_m,
        img.grid.dy_m,
        img.grid.origin_m.0,
        img.grid.origin_m.1,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for c in img.data.iter() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn read_image(path: &Path) -> Result<ComplexImage, ContainerError> {
    let bytes = std::fs::read(path)?;
    let mut r = bytes.as_slice();
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| ContainerError::Truncated)?;
    if &magic != IMAGE_MAGIC {
        return Err(ContainerError::BadMagic {
            expected: "NFSI".into(),
        });
    }
    let mut ver = [0u8; 2];
    r.read_exact(&mut ver).map_err(|_| ContainerError::Truncated)?;
    let version = u16::from_le_bytes(ver);
    if version != FORMAT_VERSION {
        return Err(ContainerError::BadVersion(version));
    }
    let rows = read_u32(&mut r)? as usize;
    let cols = read_u32(&mut r)? as usize;
    let dx = read_f64(&mut r)?;
    let dy = read_f64(&mut r)?;
    let ox = read_f64(&mut r)?;
    let oy = read_f64(&mut r)?;
    let grid = ImageGrid::new(cols, rows, dx, dy, (ox, oy))
        .map_err(|e| ContainerError::BadGrid(e.to_string()))?;
    if r.len() != rows * cols * 16 {
        return Err(ContainerError::Truncated);
    }
    let mut data = Array2::zeros((rows, cols));
    for c in data.iter_mut() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        *c = Complex64::new(re, im);
    }
    Ok(ComplexImage { grid, data })
}

/// Mask bank container: JSON header (geometry, grid, block size) followed
/// by the mask weights as f64 arrays in block order.
pub fn write_bank(path: &Path, bank: &BlockMaskBank) -> Result<(), ContainerError> {
    let header = serde_json::json!({
        "geometry": bank.geometry,
        "grid": bank.grid,
        "block_size_px": bank.block_size_px,
    });
    let header_bytes = serde_json::to_vec(&header).expect("bank header serializes");
    let mut buf = Vec::new();
    buf.extend_from_slice(BANK_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header_bytes.len() as u32).to_le_bytes());
    buf.extend_from_slice(&header_bytes);
    for mask in &bank.masks {
        for &w in mask.iter() {
            buf.extend_from_slice(&w.to_le_bytes());
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn read_bank(path: &Path) -> Result<BlockMaskBank, ContainerError> {
    let bytes = std::fs::read(path)?;
    let mut r = bytes.as_slice();
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| ContainerError::Truncated)?;
    if &magic != BANK_MAGIC {
        return Err(ContainerError::BadMagic {
            expected: "NFBK".into(),
        });
    }
    let mut ver = [0u8; 2];
    r.read_exact(&mut ver).map_err(|_| ContainerError::Truncated)?;
    if u16::from_le_bytes(ver) != FORMAT_VERSION {
        return Err(ContainerError::BadVersion(u16::from_le_bytes(ver)));
    }
    let header_len = read_u32(&mut r)? as usize;
    if r.len() < header_len {
        return Err(ContainerError::Truncated);
    }
    let (header_bytes, rest) = r.split_at(header_len);
    let header: serde_json::Value = serde_json::from_slice(header_bytes)
        .map_err(|e| ContainerError::BadHeader(e.to_string()))?;
    let geometry = serde_json::from_value(header["geometry"].clone())
        .map_err(|e| ContainerError::BadHeader(e.to_string()))?;
    let grid: ImageGrid = serde_json::from_value(header["grid"].clone())
        .map_err(|e| ContainerError::BadHeader(e.to_string()))?;
    let block_size_px = header["block_size_px"]
        .as_u64()
        .ok_or_else(|| ContainerError::BadHeader("missing block_size_px".into()))?
        as usize;
    let n_blocks = (grid.nx / block_size_px) * (grid.ny / block_size_px);
    if rest.len() != n_blocks * grid.nx * grid.ny * 8 {
        return Err(ContainerError::Truncated);
    }
    let mut r = rest;
    let mut masks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let mut m = Array2::zeros((grid.ny, grid.nx));
        for w in m.iter_mut() {
            *w = read_f64(&mut r)?;
        }
        masks.push(m);
    }
    Ok(BlockMaskBank {
        grid,
        geometry,
        block_size_px,
        masks,
    })
}

/// Named f64 arrays with a JSON descriptor header; used for network
/// checkpoints.
pub fn write_named_arrays(
    path: &Path,
    descriptor: &serde_json::Value,
    arrays: &[(String, Vec<usize>, Vec<f64>)],
) -> Result<(), ContainerError> {
    let header = serde_json::json!({
        "descriptor": descriptor,
        "arrays": arrays
            .iter()
            .map(|(name, shape, _)| serde_json::json!({"name": name, "shape": shape}))
            .collect::<Vec<_>>(),
    });
    let header_bytes = serde_json::to_vec(&header).expect("checkpoint header serializes");
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header_bytes.len() as u32).to_le_bytes());
    buf.extend_from_slice(&header_bytes);
    for (_, _, data) in arrays {
        for &v in data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn read_named_arrays(
    path: &Path,
) -> Result<(serde_json::Value, Vec<(String, Vec<usize>, Vec<f64>)>), ContainerError> {
    let bytes = std::fs::read(path)?;
    let mut r = bytes.as_slice();
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| ContainerError::Truncated)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(ContainerError::BadMagic {
            expected: "NFCK".into(),
        });
    }
    let mut ver = [0u8; 2];
    r.read_exact(&mut ver).map_err(|_| ContainerError::Truncated)?;
    if u16::from_le_bytes(ver) != FORMAT_VERSION {
        return Err(ContainerError::BadVersion(u16::from_le_bytes(ver)));
    }
    let header_len = read_u32(&mut r)? as usize;
    if r.len() < header_len {
        return Err(ContainerError::Truncated);
    }
    let (header_bytes, rest) = r.split_at(header_len);
    let header: serde_json::Value = serde_json::from_slice(header_bytes)
        .map_err(|e| ContainerError::BadHeader(e.to_string()))?;
    let descriptor = header["descriptor"].clone();
    let mut arrays = Vec::new();
    let mut r = rest;
    for a in header["arrays"]
        .as_array()
        .ok_or_else(|| ContainerError::BadHeader("missing arrays".into()))?
    {
        let name = a["name"]
            .as_str()
            .ok_or_else(|| ContainerError::BadHeader("array name".into()))?
            .to_string();
        let shape: Vec<usize> = a["shape"]
            .as_array()
            .ok_or_else(|| ContainerError::BadHeader("array shape".into()))?
            .iter()
            .map(|v| v.as_u64().unwrap_or(0) as usize)
            .collect();
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(read_f64(&mut r)?);
        }
        arrays.push((name, shape, data));
    }
    Ok((descriptor, arrays))
}

/// Export the magnitude in dB (floored at -60 dB) as an 8-bit binary PGM.
pub fn write_pgm_db(path: &Path, img: &ComplexImage) -> Result<(), ContainerError> {
    const FLOOR_DB: f64 = -60.0;
    let peak = img.peak_magnitude().max(f64::MIN_POSITIVE);
    let mut buf = format!("P5\n{} {}\n255\n", img.grid.nx, img.grid.ny).into_bytes();
    for c in img.data.iter() {
        let db = 20.0 * (c.norm() / peak).max(1e-30).log10();
        let t = ((db - FLOOR_DB) / -FLOOR_DB).clamp(0.0, 1.0);
        buf.push((t * 255.0).round() as u8);
    }
    std::fs::write(path, buf)?;
    Ok(())
}
