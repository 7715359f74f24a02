//! Artifact writers shared by the experiment front ends.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::diagnostics::{write_diagnostics_csv, DiagnosticsRecord};
use crate::error::Result;
use crate::estimates::EstimateReport;
use crate::plot::LineChart;

use super::ExperimentSpec;

/// `spec.txt` with the spec's `key = value` echo.
pub fn write_spec_echo(spec: &ExperimentSpec, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("spec.txt");
    std::fs::write(&path, spec.to_key_value_text())?;
    Ok(path)
}

/// `<stem>.csv` with one diagnostics row per record.
pub fn write_diagnostics(dir: &Path, stem: &str, records: &[DiagnosticsRecord]) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.csv"));
    let mut out = BufWriter::new(File::create(&path)?);
    write_diagnostics_csv(records, &mut out)?;
    std::io::Write::flush(&mut out)?;
    Ok(path)
}

/// Energy and log curvature deviation against time, as `<stem>_energy.svg`
/// and `<stem>_curvature.svg`.
pub fn write_diagnostics_plots(
    dir: &Path,
    stem: &str,
    records: &[DiagnosticsRecord],
) -> Result<Vec<PathBuf>> {
    let energy = dir.join(format!("{stem}_energy.svg"));
    LineChart::new(format!("{stem}: energy"), "t", "E")
        .points(records.iter().map(|r| (r.t, r.energy)))
        .write(&energy)?;
    let curvature = dir.join(format!("{stem}_curvature.svg"));
    LineChart::new(
        format!("{stem}: curvature deviation"),
        "t",
        "||K - mean||_inf",
    )
    .log_y(true)
    .points(records.iter().map(|r| (r.t, r.curv_dev_linf)))
    .write(&curvature)?;
    Ok(vec![energy, curvature])
}

/// Summary CSV of estimate reports, one row each.
pub fn write_reports(dir: &Path, name: &str, reports: &[EstimateReport]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut out = BufWriter::new(File::create(&path)?);
    for (i, r) in reports.iter().enumerate() {
        r.write_csv_row(&mut out, i == 0)?;
    }
    std::io::Write::flush(&mut out)?;
    Ok(path)
}

/// Contraction factor against horizon, as `delta.svg`.
pub fn write_delta_plot(dir: &Path, reports: &[EstimateReport]) -> Result<PathBuf> {
    let path = dir.join("delta.svg");
    let mut pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.horizon, r.delta)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    LineChart::new("contraction factor", "T", "delta")
        .log_y(true)
        .points(pts)
        .write(&path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_echo_round_trips_to_disk() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec::default();
        let path = write_spec_echo(&spec, dir.path()).unwrap();
        assert_eq!(
            std::fs::read_to_string(path).unwrap(),
            spec.to_key_value_text()
        );
    }
}
