//! Field serialization.
//!
//! * CSV: header `node,value`, one row per node, values with 17 significant
//!   digits, LF line endings.
//! * Binary: 16-byte little-endian header (`u64` kind tag, `u64` resolution)
//!   followed by the nodal values as little-endian `f64`. Round trips are
//!   bit-exact.

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use super::{build_surface, BackgroundSurface, ScalarField, SurfaceKind};
use crate::error::{Error, Result};

pub const BINARY_HEADER_LEN: usize = 16;

/// Format a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field_csv<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    writeln!(out, "node,value")?;
    for (i, v) in field.values().iter().enumerate() {
        writeln!(out, "{i},{}", fmt_f64(*v))?;
    }
    Ok(())
}

pub fn read_field_csv<R: BufRead>(
    surface: &Arc<BackgroundSurface>,
    input: R,
) -> Result<ScalarField> {
    let mut values = vec![f64::NAN; surface.node_count()];
    let mut seen = 0usize;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "node,value" {
                return Err(Error::Format(format!("unexpected CSV header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (idx, val) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("line {}: expected `node,value`", lineno + 1)))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad node index", lineno + 1)))?;
        let val: f64 = val
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad value", lineno + 1)))?;
        if idx >= values.len() {
            return Err(Error::Format(format!("node index {idx} out of range")));
        }
        values[idx] = val;
        seen += 1;
    }
    if seen != values.len() {
        return Err(Error::ShapeMismatch {
            surface: surface.describe(),
            expected: values.len(),
            got: seen,
        });
    }
    ScalarField::from_values(surface, values)
}

pub fn write_field_binary<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let surface = field.surface();
    out.write_all(&surface.kind().tag().to_le_bytes())?;
    out.write_all(&(surface.resolution() as u64).to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read one binary field record, building the surface named by its header.
pub fn read_field_binary<R: Read>(mut input: R) -> Result<ScalarField> {
    let (kind, resolution) = read_header(&mut input)?;
    let surface = build_surface(kind, resolution)?;
    read_field_body(&surface, &mut input)
}

/// Read one binary field record whose header must match `surface`.
pub fn read_field_binary_on<R: Read>(
    surface: &Arc<BackgroundSurface>,
    mut input: R,
) -> Result<ScalarField> {
    let (kind, resolution) = read_header(&mut input)?;
    if kind != surface.kind() || resolution != surface.resolution() {
        return Err(Error::Format(format!(
            "record is {kind}(resolution={resolution}), expected {}",
            surface.describe()
        )));
    }
    read_field_body(surface, &mut input)
}

fn read_header<R: Read>(input: &mut R) -> Result<(SurfaceKind, usize)> {
    let mut header = [0u8; BINARY_HEADER_LEN];
    input.read_exact(&mut header)?;
    let tag = u64::from_le_bytes(header[0..8].try_into().expect("8 bytes"));
    let resolution = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    Ok((SurfaceKind::from_tag(tag)?, resolution as usize))
}

fn read_field_body<R: Read>(
    surface: &Arc<BackgroundSurface>,
    input: &mut R,
) -> Result<ScalarField> {
    let mut buf = vec![0u8; 8 * surface.node_count()];
    input.read_exact(&mut buf)?;
    let values = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ScalarField::from_values(surface, values)
}
