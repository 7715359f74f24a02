use std::sync::Arc;

use crate::diagnostics::{weak_form_residual, TestFunction};
use crate::error::{Error, Result};
use crate::flow::{evolve, FlowConfig};
use crate::geometry::BackgroundSurface;
use crate::par;

use super::{random_field, stream_rng, ExperimentSpec};

/// Stream offset reserved for test-function draws.
const TEST_FUNCTION_STREAM: u64 = 1 << 40;

/// `count` test functions `g_i(x) b(t)` with `g_i` band-limited random fields
/// of unit sup-norm.
pub fn random_test_functions(
    surface: &Arc<BackgroundSurface>,
    seed: u64,
    count: usize,
    band_limit: usize,
    horizon: f64,
) -> Result<Vec<TestFunction>> {
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(seed, TEST_FUNCTION_STREAM + i as u64);
            Ok(TestFunction::new(
                random_field(surface, &mut rng, band_limit, 1.0)?,
                horizon,
            ))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct WeakFormOutcome {
    pub dt_levels: Vec<f64>,
    /// `residuals[level][i]` for test function `i`.
    pub residuals: Vec<Vec<f64>>,
    /// `max_i residual / dt^2` on the coarsest level.
    pub fitted_constant: f64,
    /// Whether `residual <= fitted_constant dt^2` holds for every test
    /// function on every finer level.
    pub validated: bool,
}

/// Weak-form residuals of the spec's run against random test functions at
/// each `dt` level. The constant in `residual <= C dt^2` is fitted on the
/// coarsest level and checked on the others.
pub fn weak_form_study(spec: &ExperimentSpec, count: usize) -> Result<WeakFormOutcome> {
    if spec.dt_levels.len() < 2 {
        return Err(Error::InvalidFlowConfig(
            "weak-form study needs two or more dt levels".into(),
        ));
    }
    let surface = spec.build_surface()?;
    let u0 = spec.initial_data(&surface)?;
    let phis = random_test_functions(&surface, spec.seed, count, spec.band_limit, spec.t_end)?;
    let residuals: Vec<Result<Vec<f64>>> = par::map(&spec.dt_levels, |&dt| {
        let traj = evolve(&u0, &FlowConfig::new(spec.integrator, dt, spec.t_end))?;
        phis.iter()
            .map(|phi| weak_form_residual(&traj, phi))
            .collect()
    });
    let residuals = residuals.into_iter().collect::<Result<Vec<_>>>()?;
    let dt0 = spec.dt_levels[0];
    let fitted_constant = residuals[0]
        .iter()
        .map(|r| r / (dt0 * dt0))
        .fold(0.0, f64::max);
    let validated = spec
        .dt_levels
        .iter()
        .zip(&residuals)
        .skip(1)
        .all(|(dt, level)| level.iter().all(|r| *r <= fitted_constant * dt * dt));
    Ok(WeakFormOutcome {
        dt_levels: spec.dt_levels.clone(),
        residuals,
        fitted_constant,
        validated,
    })
}
