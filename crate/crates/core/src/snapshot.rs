//! MGSF snapshots: `"MGSF"`, version `u16`, radius `N` as `u32`, then the
//! `(2N+1)³` coefficients as little-endian `f64` pairs `(re, im)` in grid
//! order (`k1` slowest). Metadata goes to a JSON sidecar.
//!
//! Line fields are written embedded in the smallest cube that holds them.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::ModelParams;
use crate::fields::{embed_line, FieldError, GridSpec, SpectralField};
use crate::timestepping::State;

pub const MAGIC: &[u8; 4] = b"MGSF";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not an MGSF file")]
    BadMagic,
    #[error("unsupported MGSF version {0}")]
    Version(u16),
    #[error("truncated MGSF payload: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub n: usize,
    pub pad: f64,
    /// `[p1, p2, p3]` and `N_L` when the state lives on a line.
    pub line: Option<[i64; 3]>,
    pub line_modes: Option<usize>,
    pub model: ModelParams,
}

pub fn write_field<W: Write>(mut w: W, f: &SpectralField) -> Result<(), SnapshotError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(f.grid().n as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * f.coeffs().len());
    for c in f.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads coefficients and validates reality and zero vertical mean to `tol`.
pub fn read_field<R: Read>(mut r: R, pad: f64, tol: f64) -> Result<SpectralField, SnapshotError> {
    let mut head = [0u8; 10];
    r.read_exact(&mut head).map_err(|_| SnapshotError::BadMagic)?;
    if &head[..4] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let n = u32::from_le_bytes([head[6], head[7], head[8], head[9]]) as usize;
    let grid = GridSpec::new(n, pad)?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let expected = 16 * grid.len();
    if payload.len() != expected {
        return Err(SnapshotError::Truncated {
            expected,
            got: payload.len(),
        });
    }
    let coeffs = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Ok(SpectralField::from_coeffs(grid, coeffs, tol)?)
}

fn as_cube(state: &State) -> Result<SpectralField, SnapshotError> {
    Ok(match state {
        State::Full(f) => f.clone(),
        State::Line(l) => embed_line(l, GridSpec::new(l.required_radius().max(2), 1.5)?)?,
    })
}

/// Writes `<stem>.mgsf` and `<stem>.json`; returns both paths.
pub fn write_snapshot(dir: &Path, stem: &str, t: f64, state: &State, model: &ModelParams) -> Result<(PathBuf, PathBuf), SnapshotError> {
    let cube = as_cube(state)?;
    let bin = dir.join(format!("{stem}.mgsf"));
    let json = dir.join(format!("{stem}.json"));
    let mut f = std::io::BufWriter::new(fs::File::create(&bin)?);
    write_field(&mut f, &cube)?;
    f.flush()?;
    let (line, line_modes) = match state {
        State::Line(l) => (Some(l.line().direction().as_array()), Some(l.truncation())),
        State::Full(_) => (None, None),
    };
    let meta = SnapshotMeta {
        t,
        n: cube.grid().n,
        pad: cube.grid().pad,
        line,
        line_modes,
        model: *model,
    };
    fs::write(&json, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok((bin, json))
}
