//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Keys carry a section prefix
//! (`surface.kind`, `flow.dt`). Later assignments win, so `--set` flags
//! applied after the file override it.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ricci_core::experiments::ExperimentSpec;
use ricci_core::flow::Integrator;
use ricci_core::SurfaceKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: {reason} (got `{value}`)")]
    Invalid {
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Uniqueness,
    Convergence,
    Manufactured,
    Inequalities,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Simulate,
        Command::Uniqueness,
        Command::Convergence,
        Command::Manufactured,
        Command::Inequalities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Uniqueness => "uniqueness",
            Command::Convergence => "convergence",
            Command::Manufactured => "manufactured",
            Command::Inequalities => "inequalities",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                format!("expected one of {}", names.join(", "))
            })
    }
}

/// Grid resolution used by `manufactured` when none is given: a coarse grid
/// keeps the stable explicit step large enough for a clean RK4 slope.
pub const MANUFACTURED_RESOLUTION: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub name: String,
    pub surface: SurfaceKind,
    /// `None` means the command's default (64, or 8 for `manufactured`).
    pub resolution: Option<usize>,
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    pub store_every: usize,
    pub cfl_safety: f64,
    pub seed: u64,
    pub amplitude: f64,
    pub band_limit: usize,
    pub dt_levels: Vec<f64>,
    pub horizons: Vec<f64>,
    pub samples: usize,
    pub trajectory_samples: usize,
    pub resolutions: Vec<usize>,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = ExperimentSpec::default();
        Self {
            command: Command::Simulate,
            name: "run".into(),
            surface: SurfaceKind::FlatTorus,
            resolution: None,
            integrator: Integrator::Rk4,
            dt: 1e-3,
            t_end: 1.0,
            store_every: 1,
            cfl_safety: 0.9,
            seed: spec.seed,
            amplitude: spec.initial_amplitude,
            band_limit: spec.band_limit,
            dt_levels: spec.dt_levels,
            horizons: spec.horizons,
            samples: spec.samples,
            trajectory_samples: spec.trajectory_samples,
            resolutions: vec![64, 128],
            output_dir: PathBuf::from("output"),
            emit_plots: false,
        }
    }
}

/// Every accepted key with its meaning, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    (
        "command",
        "simulate | uniqueness | convergence | manufactured | inequalities",
    ),
    ("name", "label written into the spec echo"),
    ("surface.kind", "torus | sphere"),
    (
        "surface.resolution",
        "grid size N (torus) or degree L (sphere); default 64, 8 for manufactured",
    ),
    ("flow.integrator", "rk4 | imex1 | imex4"),
    ("flow.dt", "macro step, > 0"),
    ("flow.t_end", "final time, >= flow.dt"),
    ("flow.store_every", "store every k-th step, >= 1"),
    ("flow.cfl_safety", "RK4 substep safety factor in (0, 1]"),
    ("seed", "random seed for initial data and samples"),
    (
        "init.amplitude",
        "sup-norm of the random initial data, >= 0",
    ),
    (
        "init.band_limit",
        "highest wavenumber or degree of the initial data",
    ),
    (
        "experiment.dt_levels",
        "space-separated step ladder, coarsest first",
    ),
    (
        "experiment.horizons",
        "space-separated horizons of the contraction ladder",
    ),
    (
        "experiment.samples",
        "random fields per inequality campaign",
    ),
    (
        "experiment.trajectory_samples",
        "short trajectories per inequality campaign",
    ),
    (
        "experiment.resolutions",
        "space-separated resolutions of the inequality campaign",
    ),
    ("output.dir", "output directory"),
    ("output.plots", "true | false: write SVG plots"),
];

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

fn parse<T: FromStr>(key: &str, value: &str, what: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(key, value, format!("expected {what}")))
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(key, value, "a number")?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, value, format!("{key} must be > 0")))
    }
}

fn positive_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let items = value
        .split_whitespace()
        .map(|v| {
            positive(key, v).map_err(|_| invalid(key, value, "every entry must be a number > 0"))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if items.is_empty() {
        return Err(invalid(key, value, "list must not be empty"));
    }
    Ok(items)
}

impl RunConfig {
    /// Apply one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "command" => {
                self.command = value.parse().map_err(|e: String| invalid(key, value, e))?
            }
            "name" => self.name = value.to_string(),
            "surface.kind" => {
                self.surface = value
                    .parse()
                    .map_err(|_| invalid(key, value, "expected torus or sphere"))?
            }
            "surface.resolution" => {
                self.resolution = Some(parse(key, value, "a positive integer")?)
            }
            "flow.integrator" => {
                self.integrator = value
                    .parse()
                    .map_err(|_| invalid(key, value, "expected rk4, imex1 or imex4"))?
            }
            "flow.dt" => {
                self.dt =
                    positive("dt", value).map_err(|_| invalid(key, value, "dt must be > 0"))?
            }
            "flow.t_end" => {
                self.t_end = positive("t_end", value)
                    .map_err(|_| invalid(key, value, "t_end must be > 0"))?
            }
            "flow.store_every" => {
                self.store_every = parse(key, value, "a positive integer")?;
                if self.store_every == 0 {
                    return Err(invalid(key, value, "store_every must be >= 1"));
                }
            }
            "flow.cfl_safety" => {
                let v: f64 = parse(key, value, "a number")?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err(invalid(key, value, "cfl_safety must lie in (0, 1]"));
                }
                self.cfl_safety = v;
            }
            "seed" => self.seed = parse(key, value, "an unsigned integer")?,
            "init.amplitude" => {
                let v: f64 = parse(key, value, "a number")?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(invalid(key, value, "amplitude must be >= 0"));
                }
                self.amplitude = v;
            }
            "init.band_limit" => self.band_limit = parse(key, value, "a nonnegative integer")?,
            "experiment.dt_levels" => self.dt_levels = positive_list(key, value)?,
            "experiment.horizons" => self.horizons = positive_list(key, value)?,
            "experiment.samples" => self.samples = parse(key, value, "a nonnegative integer")?,
            "experiment.trajectory_samples" => {
                self.trajectory_samples = parse(key, value, "a nonnegative integer")?
            }
            "experiment.resolutions" => {
                self.resolutions = value
                    .split_whitespace()
                    .map(|v| parse(key, v, "space-separated positive integers"))
                    .collect::<Result<_, _>>()?;
                if self.resolutions.is_empty() {
                    return Err(invalid(key, value, "list must not be empty"));
                }
            }
            "output.dir" => self.output_dir = PathBuf::from(value),
            "output.plots" => self.emit_plots = parse(key, value, "true or false")?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Apply every assignment of a config text.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax {
                line: 0,
                text: assignment.to_string(),
            })?;
        self.set(key, value)
    }

    /// Cross-field checks that a single assignment cannot see.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dt > self.t_end {
            return Err(invalid(
                "flow.dt",
                &self.dt.to_string(),
                format!("dt must not exceed t_end = {}", self.t_end),
            ));
        }
        if let Some(&h) = self.horizons.iter().find(|&&h| h > self.t_end) {
            if self.command == Command::Uniqueness {
                return Err(invalid(
                    "experiment.horizons",
                    &h.to_string(),
                    format!("horizons must not exceed t_end = {}", self.t_end),
                ));
            }
        }
        Ok(())
    }

    pub fn effective_resolution(&self) -> usize {
        self.resolution.unwrap_or(match self.command {
            Command::Manufactured => MANUFACTURED_RESOLUTION,
            _ => 64,
        })
    }

    pub fn experiment_spec(&self) -> ExperimentSpec {
        ExperimentSpec {
            name: self.name.clone(),
            surface: self.surface,
            resolution: self.effective_resolution(),
            seed: self.seed,
            initial_amplitude: self.amplitude,
            band_limit: self.band_limit,
            dt_levels: self.dt_levels.clone(),
            t_end: self.t_end,
            integrator: self.integrator,
            horizons: self.horizons.clone(),
            samples: self.samples,
            trajectory_samples: self.trajectory_samples,
            outputs: Some(self.output_dir.clone()),
        }
    }

    /// Resolved configuration as config text; parsing it reproduces `self`.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command);
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "surface.kind = {}", self.surface);
        let _ = writeln!(out, "surface.resolution = {}", self.effective_resolution());
        let _ = writeln!(out, "flow.integrator = {}", self.integrator);
        let _ = writeln!(out, "flow.dt = {:e}", self.dt);
        let _ = writeln!(out, "flow.t_end = {:e}", self.t_end);
        let _ = writeln!(out, "flow.store_every = {}", self.store_every);
        let _ = writeln!(out, "flow.cfl_safety = {:e}", self.cfl_safety);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "init.amplitude = {:e}", self.amplitude);
        let _ = writeln!(out, "init.band_limit = {}", self.band_limit);
        let _ = writeln!(out, "experiment.dt_levels = {}", list(&self.dt_levels));
        let _ = writeln!(out, "experiment.horizons = {}", list(&self.horizons));
        let _ = writeln!(out, "experiment.samples = {}", self.samples);
        let _ = writeln!(
            out,
            "experiment.trajectory_samples = {}",
            self.trajectory_samples
        );
        let res: Vec<String> = self.resolutions.iter().map(|r| r.to_string()).collect();
        let _ = writeln!(out, "experiment.resolutions = {}", res.join(" "));
        let _ = writeln!(out, "output.dir = {}", self.output_dir.display());
        let _ = writeln!(out, "output.plots = {}", self.emit_plots);
        out
    }
}

/// Build a config: defaults, then the file, then `--set` overrides, then the
/// dedicated flags.
pub fn parse_config(
    command: Option<Command>,
    file: Option<&Path>,
    overrides: &[String],
    out: Option<&Path>,
    plots: bool,
) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.apply_text(&text)?;
    }
    for o in overrides {
        cfg.apply_override(o)?;
    }
    if let Some(c) = command {
        cfg.command = c;
    }
    if let Some(dir) = out {
        cfg.output_dir = dir.to_path_buf();
    }
    if plots {
        cfg.emit_plots = true;
    }
    cfg.validate()?;
    Ok(cfg)
}
