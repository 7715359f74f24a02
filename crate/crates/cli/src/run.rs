//! Command dispatch and artifact writing.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ricci_core::diagnostics::diagnostics;
use ricci_core::estimates::EstimateReport;
use ricci_core::experiments::{
    convergence_to_constant_curvature, inequality_campaign, manufactured_convergence,
    uniqueness_experiment, write_delta_plot, write_diagnostics, write_diagnostics_plots,
    write_reports, write_spec_echo,
};
use ricci_core::flow::{evolve, write_trajectory_binary, FlowConfig, RunMetadata, Trajectory};
use ricci_core::geometry::io::fmt_f64;
use ricci_core::plot::LineChart;
use ricci_core::Error;

use crate::config::{Command, RunConfig};

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_BLOWUP: u8 = 2;

/// What a finished (or aborted) run produced.
#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Set when the blow-up guard stopped the run.
    pub blow_up: Option<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> u8 {
        if self.blow_up.is_some() {
            EXIT_BLOWUP
        } else {
            EXIT_OK
        }
    }
}

/// Execute `cfg`, writing every artifact below `cfg.output_dir`.
///
/// Blow-ups are not errors here: they yield a report with partial outputs
/// and [`EXIT_BLOWUP`]. Errors are configuration or I/O failures.
pub fn run(cfg: &RunConfig) -> Result<RunReport, Error> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir)?;
    let mut files = vec![write_text(dir, "config.txt", &cfg.to_text())?];
    let outcome = match cfg.command {
        Command::Simulate => simulate(cfg, dir, &mut files),
        Command::Uniqueness => uniqueness(cfg, dir, &mut files),
        Command::Convergence => convergence(cfg, dir, &mut files),
        Command::Manufactured => manufactured(cfg, dir, &mut files),
        Command::Inequalities => inequalities(cfg, dir, &mut files),
    };
    match outcome {
        Ok(()) => Ok(RunReport {
            files,
            blow_up: None,
        }),
        Err(Error::BlowUp {
            t,
            sup_norm,
            partial,
        }) => {
            let note = format!(
                "blow-up guard tripped at t = {} with sup|u| = {}\n",
                fmt_f64(t),
                fmt_f64(sup_norm)
            );
            if let Some(traj) = partial {
                write_trajectory(dir, &traj, &mut files)?;
                files.push(write_diagnostics(dir, "diagnostics", &diagnostics(&traj))?);
            }
            files.push(write_text(dir, "blowup.txt", &note)?);
            Ok(RunReport {
                files,
                blow_up: Some(note.trim_end().to_string()),
            })
        }
        Err(e) => Err(e),
    }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Error> {
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

fn write_csv(dir: &Path, name: &str, header: &str, rows: &[String]) -> Result<PathBuf, Error> {
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    let _ = writeln!(text, "{header}");
    for r in rows {
        let _ = writeln!(text, "{r}");
    }
    write_text(dir, name, &text)
}

fn write_trajectory(dir: &Path, traj: &Trajectory, files: &mut Vec<PathBuf>) -> Result<(), Error> {
    let path = dir.join("trajectory.bin");
    let mut out = BufWriter::new(File::create(&path)?);
    write_trajectory_binary(traj, &mut out)?;
    out.flush()?;
    files.push(path);
    Ok(())
}

fn flow_config(cfg: &RunConfig) -> FlowConfig {
    let mut flow =
        FlowConfig::new(cfg.integrator, cfg.dt, cfg.t_end).with_store_every(cfg.store_every);
    flow.cfl_safety = cfg.cfl_safety;
    flow
}

fn simulate(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), Error> {
    let spec = cfg.experiment_spec();
    files.push(write_spec_echo(&spec, dir)?);
    let surface = spec.build_surface()?;
    let u0 = spec.initial_data(&surface)?;
    let flow = flow_config(cfg);
    let traj = evolve(&u0, &flow)?;
    let records = diagnostics(&traj);
    files.push(write_diagnostics(dir, "diagnostics", &records)?);
    write_trajectory(dir, &traj, files)?;
    let meta = dir.join("metadata.txt");
    let mut out = BufWriter::new(File::create(&meta)?);
    RunMetadata::new(&traj, &flow).write(&mut out)?;
    out.flush()?;
    files.push(meta);
    if cfg.emit_plots {
        files.extend(write_diagnostics_plots(dir, "diagnostics", &records)?);
    }
    Ok(())
}

fn uniqueness(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), Error> {
    let spec = cfg.experiment_spec();
    files.push(write_spec_echo(&spec, dir)?);
    let out = uniqueness_experiment(&spec)?;
    let header = format!("dt,discrepancy,{}", EstimateReport::csv_header());
    let rows: Vec<String> = out
        .runs
        .iter()
        .map(|r| {
            format!(
                "{},{},{}",
                fmt_f64(r.dt),
                fmt_f64(r.discrepancy),
                r.report.csv_row()
            )
        })
        .collect();
    files.push(write_csv(dir, "summary.csv", &header, &rows)?);
    let finest = out.finest();
    files.push(write_reports(dir, "ladder.csv", &finest.ladder)?);
    let fit = &out.discrepancy_fit;
    files.push(write_text(
        dir,
        "fit.txt",
        &format!(
            "reference = {}\ncandidate = {}\nsobolev_constant = {}\ndiscrepancy_slope = {}\ndiscrepancy_correlation = {}\n",
            out.reference_integrator,
            out.candidate_integrator,
            fmt_f64(out.sobolev_constant),
            fmt_f64(fit.slope),
            fmt_f64(fit.correlation)
        ),
    )?);
    for (i, r) in out.runs.iter().enumerate() {
        files.push(write_diagnostics(
            dir,
            &format!("reference_{i}"),
            &r.reference,
        )?);
        files.push(write_diagnostics(
            dir,
            &format!("candidate_{i}"),
            &r.candidate,
        )?);
    }
    if cfg.emit_plots {
        files.push(write_delta_plot(dir, &finest.ladder)?);
        files.extend(write_diagnostics_plots(
            dir,
            "reference_finest",
            &finest.reference,
        )?);
    }
    Ok(())
}

fn convergence(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), Error> {
    let mut spec = cfg.experiment_spec();
    spec.dt_levels = vec![cfg.dt];
    files.push(write_spec_echo(&spec, dir)?);
    let out = convergence_to_constant_curvature(&spec)?;
    files.push(write_diagnostics(dir, "diagnostics", &out.records)?);
    let row = match out.fit {
        Some(f) => format!(
            "{},{},{},{}",
            out.status.name(),
            fmt_f64(f.slope),
            fmt_f64(f.intercept),
            fmt_f64(f.correlation)
        ),
        None => format!("{},,,", out.status.name()),
    };
    files.push(write_csv(
        dir,
        "summary.csv",
        "status,slope,intercept,correlation",
        &[row],
    )?);
    if cfg.emit_plots {
        files.extend(write_diagnostics_plots(dir, "diagnostics", &out.records)?);
    }
    Ok(())
}

fn manufactured(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), Error> {
    let spec = cfg.experiment_spec();
    files.push(write_spec_echo(&spec, dir)?);
    let outcomes = manufactured_convergence(&spec)?;
    let mut errors = Vec::new();
    let mut orders = Vec::new();
    for o in &outcomes {
        for (dt, e) in o.dt_levels.iter().zip(&o.errors) {
            errors.push(format!("{},{},{}", o.integrator, fmt_f64(*dt), fmt_f64(*e)));
        }
        orders.push(format!(
            "{},{},{},{}",
            o.integrator,
            o.integrator.order(),
            fmt_f64(o.fit.slope),
            fmt_f64(o.fit.correlation)
        ));
        if cfg.emit_plots {
            let path = dir.join(format!("errors_{}.svg", o.integrator));
            LineChart::new(
                format!("{} error at t_end", o.integrator),
                "log10 dt",
                "max error",
            )
            .log_y(true)
            .points(
                o.dt_levels
                    .iter()
                    .zip(&o.errors)
                    .map(|(d, e)| (d.log10(), *e)),
            )
            .write(&path)?;
            files.push(path);
        }
    }
    files.push(write_csv(
        dir,
        "errors.csv",
        "integrator,dt,error",
        &errors,
    )?);
    files.push(write_csv(
        dir,
        "summary.csv",
        "integrator,nominal_order,slope,correlation",
        &orders,
    )?);
    Ok(())
}

fn inequalities(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), Error> {
    let spec = cfg.experiment_spec();
    files.push(write_spec_echo(&spec, dir)?);
    let out = inequality_campaign(&spec, &cfg.resolutions)?;
    let mut header = String::from(
        "resolution,samples,trajectories,gn_max,tm_max,space_time_max,sobolev_constant",
    );
    if let Some(first) = out.per_resolution.first() {
        for (p, _, _) in &first.moment_max {
            let _ = write!(header, ",moment_plus_p{p},moment_minus_p{p}");
        }
    }
    header.push_str(",all_finite");
    let rows: Vec<String> = out
        .per_resolution
        .iter()
        .map(|s| {
            let mut row = format!(
                "{},{},{},{},{},{},{}",
                s.resolution,
                s.samples,
                s.trajectories,
                fmt_f64(s.gn_max),
                fmt_f64(s.tm_max),
                fmt_f64(s.space_time_max),
                fmt_f64(s.sobolev_constant())
            );
            for (_, plus, minus) in &s.moment_max {
                let _ = write!(row, ",{},{}", fmt_f64(*plus), fmt_f64(*minus));
            }
            let _ = write!(row, ",{}", s.all_finite);
            row
        })
        .collect();
    files.push(write_csv(dir, "summary.csv", &header, &rows)?);
    files.push(write_text(
        dir,
        "gn_spread.txt",
        &format!("gn_spread = {}\n", fmt_f64(out.gn_spread())),
    )?);
    Ok(())
}
