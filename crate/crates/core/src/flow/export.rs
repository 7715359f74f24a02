//! Trajectory files: a wide CSV (`t,n0,n1,...`), a binary stack of
//! `(t, field record)` pairs, and a `key = value` metadata sidecar.

use std::fmt::Write as _;
use std::io::{ErrorKind, Read, Write};

use sha2::{Digest, Sha256};

use super::{FlowConfig, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::io::{fmt_f64, read_field_binary, write_field_binary};
use crate::geometry::ScalarField;

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let mut header = String::from("t");
    for i in 0..traj.surface().node_count() {
        let _ = write!(header, ",n{i}");
    }
    writeln!(out, "{header}")?;
    for (t, state) in traj.times().iter().zip(traj.states()) {
        let mut row = fmt_f64(*t);
        for v in state.values() {
            row.push(',');
            row.push_str(&fmt_f64(*v));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn write_trajectory_binary<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    for (t, state) in traj.times().iter().zip(traj.states()) {
        out.write_all(&t.to_le_bytes())?;
        write_field_binary(state, &mut out)?;
    }
    Ok(())
}

/// Read every `(t, state)` record of a binary trajectory stack.
pub fn read_trajectory_binary<R: Read>(mut input: R) -> Result<Vec<(f64, ScalarField)>> {
    let mut records = Vec::new();
    loop {
        let mut t = [0u8; 8];
        match input.read_exact(&mut t) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let field = read_field_binary(&mut input).map_err(|e| match e {
            Error::Io(io) if io.kind() == ErrorKind::UnexpectedEof => {
                Error::Format("truncated trajectory record".into())
            }
            other => other,
        })?;
        records.push((f64::from_le_bytes(t), field));
    }
    Ok(records)
}

/// Sidecar describing a run. The run id hashes the configuration together
/// with the bit pattern of the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub entries: Vec<(String, String)>,
}

impl RunMetadata {
    pub fn new(traj: &Trajectory, cfg: &FlowConfig) -> Self {
        let surface = traj.surface();
        let mut entries = vec![
            ("surface.kind".to_string(), surface.kind().to_string()),
            (
                "surface.resolution".to_string(),
                surface.resolution().to_string(),
            ),
            ("surface.kbar".to_string(), fmt_f64(surface.kbar())),
            ("flow.integrator".to_string(), cfg.integrator.to_string()),
            ("flow.dt".to_string(), fmt_f64(cfg.dt)),
            ("flow.t_end".to_string(), fmt_f64(cfg.t_end)),
            ("flow.cfl_safety".to_string(), fmt_f64(cfg.cfl_safety)),
            ("flow.store_every".to_string(), cfg.store_every.to_string()),
            (
                "flow.forcing".to_string(),
                cfg.forcing.is_some().to_string(),
            ),
            ("stored_states".to_string(), traj.len().to_string()),
        ];
        let mut hasher = Sha256::new();
        for (k, v) in &entries {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        for v in traj.states()[0].values() {
            hasher.update(v.to_le_bytes());
        }
        let digest = hasher.finalize();
        let id: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
        entries.insert(0, ("run_id".to_string(), id));
        Self { entries }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}")?;
        }
        Ok(())
    }
}
