//! Raw field dumps: little-endian f64 values plus a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::{Field, Grid};
use crate::error::{Error, Result};

pub const AXIS_ORDER: &str = "x,y,z row-major (z fastest)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_length: f64,
    pub alpha: f64,
    pub axis_order: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `path` (raw values) and `path` with a `.json` extension (sidecar).
pub fn write_field(path: &Path, field: &Field, alpha: f64) -> Result<()> {
    let mut bytes = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let sidecar = FieldSidecar {
        n: field.grid.n(),
        half_length: field.grid.half_length(),
        alpha,
        axis_order: AXIS_ORDER.to_string(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<(Field, FieldSidecar)> {
    let sidecar: FieldSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let grid = Grid::new(sidecar.n, sidecar.half_length)?;
    let bytes = fs::read(path)?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Size(format!(
            "{}: expected {} bytes, found {}",
            path.display(),
            grid.len() * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((Field::from_values(grid, values)?, sidecar))
}
