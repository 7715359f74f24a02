//! Reproducible experiment recipes: seeded random initial data, uniqueness
//! stress tests on integrator pairs, convergence studies, long-time decay
//! fits and inequality sampling campaigns.
//!
//! Everything random is drawn from ChaCha streams keyed by
//! [`ExperimentSpec::seed`], so a spec determines its outputs bit for bit.
//! Independent runs (ladder members, samples) execute through [`crate::par`].

mod conservation;
mod convergence;
mod inequalities;
mod manufactured;
mod output;
mod uniqueness;
mod weak_form;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flow::{normalize_volume, Integrator};
use crate::geometry::io::fmt_f64;
use crate::geometry::{
    build_surface, BackgroundSurface, Grid, ScalarField, SphCoeffs, SurfaceKind,
};

pub use conservation::{conservation_study, ConservationRun};
pub use convergence::{convergence_to_constant_curvature, ConvergenceOutcome, ConvergenceStatus};
pub use inequalities::{
    inequality_campaign, measure_inequalities, CampaignSummary, InequalitySummary, MOMENT_EXPONENTS,
};
pub use manufactured::{manufactured_convergence, ManufacturedOutcome};
pub use output::{
    write_delta_plot, write_diagnostics, write_diagnostics_plots, write_reports, write_spec_echo,
};
pub use uniqueness::{uniqueness_experiment, UniquenessOutcome, UniquenessRun};
pub use weak_form::{random_test_functions, weak_form_study, WeakFormOutcome};

/// Parameters of one experiment. Fields not used by a recipe are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub surface: SurfaceKind,
    pub resolution: usize,
    pub seed: u64,
    /// Sup-norm of the random initial data before volume normalization.
    pub initial_amplitude: f64,
    pub band_limit: usize,
    /// Time-step ladder, coarsest first.
    pub dt_levels: Vec<f64>,
    pub t_end: f64,
    /// Integrator for single-trajectory recipes.
    pub integrator: Integrator,
    /// Horizons of the contraction ladder.
    pub horizons: Vec<f64>,
    /// Random fields drawn by the inequality campaign.
    pub samples: usize,
    /// Short trajectories drawn for the space-time Sobolev ratio.
    pub trajectory_samples: usize,
    pub outputs: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            surface: SurfaceKind::FlatTorus,
            resolution: 64,
            seed: 42,
            initial_amplitude: 0.1,
            band_limit: 2,
            dt_levels: vec![4e-3, 2e-3, 1e-3],
            t_end: 1.0,
            integrator: Integrator::Imex4,
            horizons: vec![0.4, 0.2, 0.1, 0.05],
            samples: 1000,
            trajectory_samples: 20,
            outputs: None,
        }
    }
}

impl ExperimentSpec {
    pub fn build_surface(&self) -> Result<Arc<BackgroundSurface>> {
        build_surface(self.surface, self.resolution)
    }

    pub fn initial_data(&self, surface: &Arc<BackgroundSurface>) -> Result<ScalarField> {
        random_initial_data(surface, self.seed, self.band_limit, self.initial_amplitude)
    }

    pub fn finest_dt(&self) -> Result<f64> {
        self.dt_levels
            .iter()
            .copied()
            .reduce(f64::min)
            .ok_or_else(|| Error::InvalidFlowConfig("dt_levels is empty".into()))
    }

    /// `key = value` echo of every field.
    pub fn to_key_value_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "surface.kind = {}", self.surface);
        let _ = writeln!(out, "surface.resolution = {}", self.resolution);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(
            out,
            "initial_amplitude = {}",
            fmt_f64(self.initial_amplitude)
        );
        let _ = writeln!(out, "band_limit = {}", self.band_limit);
        let _ = writeln!(out, "dt_levels = {}", list(&self.dt_levels));
        let _ = writeln!(out, "t_end = {}", fmt_f64(self.t_end));
        let _ = writeln!(out, "integrator = {}", self.integrator);
        let _ = writeln!(out, "horizons = {}", list(&self.horizons));
        let _ = writeln!(out, "samples = {}", self.samples);
        let _ = writeln!(out, "trajectory_samples = {}", self.trajectory_samples);
        out
    }
}

/// Least-squares line `y = slope x + intercept` with Pearson correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need two or more points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite sample".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let correlation = if syy == 0.0 {
        0.0
    } else {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept: my - slope * mx,
        correlation,
    })
}

/// Slope of `log error` against `log dt`.
pub fn convergence_order(dts: &[f64], errors: &[f64]) -> Result<FitResult> {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    fit_line(&xs, &ys)
}

/// Independent generator for sub-stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Band-limited Gaussian field with spectral decay `(1 + |k|^2)^(-2)`,
/// rescaled to sup-norm `amplitude` (no volume normalization).
///
/// Modes are drawn in a fixed order that does not depend on the grid, so the
/// same seed yields the same continuum shape at every resolution; only the
/// sup-norm rescaling, taken over grid nodes, differs slightly.
pub fn random_field(
    surface: &Arc<BackgroundSurface>,
    rng: &mut ChaCha8Rng,
    band_limit: usize,
    amplitude: f64,
) -> Result<ScalarField> {
    let max = surface.max_band_limit();
    if band_limit > max {
        return Err(Error::BandLimit {
            band: band_limit,
            max,
        });
    }
    if band_limit == 0 || amplitude == 0.0 {
        return Ok(ScalarField::zeros(surface));
    }
    let values = match surface.grid() {
        Grid::Torus(grid) => {
            let b = band_limit as i64;
            let mut modes = Vec::with_capacity(((2 * b + 1) * (2 * b + 1)) as usize);
            for kx in -b..=b {
                for ky in -b..=b {
                    if kx == 0 && ky == 0 {
                        continue;
                    }
                    let decay = (1.0 + (kx * kx + ky * ky) as f64).powi(-2);
                    let c = Complex64::new(normal(rng), normal(rng)) * decay;
                    modes.push(((kx, ky), c));
                }
            }
            grid.synthesize(&modes)
        }
        Grid::Sphere(grid) => {
            let mut coeffs = SphCoeffs::zeros(surface.resolution());
            for l in 1..=band_limit {
                let decay = (1.0 + (l * (l + 1)) as f64).powi(-2);
                for m in 0..=l {
                    let idx = crate::geometry::sphere::tri(l, m);
                    coeffs.cos[idx] = normal(rng) * decay;
                    if m > 0 {
                        coeffs.sin[idx] = normal(rng) * decay;
                    }
                }
            }
            grid.synthesis(&coeffs)
        }
    };
    let field = ScalarField::from_values(surface, values)?;
    let sup = field.sup_norm();
    if sup == 0.0 {
        return Ok(field);
    }
    Ok(field.scale(amplitude / sup))
}

/// Random initial data: [`random_field`] from stream 0 of `seed`, then shifted
/// to unit volume.
pub fn random_initial_data(
    surface: &Arc<BackgroundSurface>,
    seed: u64,
    band_limit: usize,
    amplitude: f64,
) -> Result<ScalarField> {
    let mut rng = stream_rng(seed, 0);
    let field = random_field(surface, &mut rng, band_limit, amplitude)?;
    if field.sup_norm() == 0.0 {
        return Ok(field);
    }
    Ok(normalize_volume(&field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::volume;

    #[test]
    fn fit_recovers_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 2.0).abs() < 1e-14);
        assert!((f.correlation + 1.0).abs() < 1e-14);
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn random_initial_data_examples() {
        let t = build_surface(SurfaceKind::FlatTorus, 64).unwrap();
        assert_eq!(random_initial_data(&t, 1, 4, 0.0).unwrap().sup_norm(), 0.0);
        let a = random_initial_data(&t, 42, 4, 0.3).unwrap();
        let b = random_initial_data(&t, 42, 4, 0.3).unwrap();
        assert_eq!(a, b);
        assert!((volume(&a) - 1.0).abs() < 1e-12);
        assert!((a.max() - a.min()) > 0.3);
        assert_ne!(a, random_initial_data(&t, 43, 4, 0.3).unwrap());
        assert!(matches!(
            random_initial_data(&t, 1, 22, 0.3),
            Err(Error::BandLimit { max: 21, .. })
        ));
    }

    #[test]
    fn random_fields_are_band_limited_and_resolution_independent() {
        for (kind, lo, hi) in [
            (SurfaceKind::FlatTorus, 32, 64),
            (SurfaceKind::RoundSphere, 15, 31),
        ] {
            let a = build_surface(kind, lo).unwrap();
            let b = build_surface(kind, hi).unwrap();
            let fa = random_field(&a, &mut stream_rng(7, 3), 3, 1.0).unwrap();
            let fb = random_field(&b, &mut stream_rng(7, 3), 3, 1.0).unwrap();
            assert!(fa.truncate(3).sub(&fa).unwrap().sup_norm() < 1e-12);
            // identical continuum fields up to the sup-norm rescaling
            let up = fa.resample(&b).unwrap();
            let ratio = fb.l2_norm() / up.l2_norm();
            assert!(
                up.scale(ratio).sub(&fb).unwrap().sup_norm() < 1e-10,
                "{kind}"
            );
        }
    }

    #[test]
    fn sphere_initial_data_is_normalized() {
        let s = build_surface(SurfaceKind::RoundSphere, 31).unwrap();
        let u = random_initial_data(&s, 5, 6, 0.1).unwrap();
        assert!((volume(&u) - 1.0).abs() < 1e-12);
    }
}
