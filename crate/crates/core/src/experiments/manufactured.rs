use std::sync::Arc;

use crate::error::Result;
use crate::flow::{cfl_step, evolve_with, FlowConfig, Forcing, Integrator, ManufacturedSolution};
use crate::par;

use super::{convergence_order, ExperimentSpec, FitResult};

/// Amplitude `a0` of the manufactured solution `a0 exp(-t) phi`.
pub const MANUFACTURED_AMPLITUDE: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct ManufacturedOutcome {
    pub integrator: Integrator,
    pub dt_levels: Vec<f64>,
    /// `||u(t_end) - u*(t_end)||_inf` per level.
    pub errors: Vec<f64>,
    pub fit: FitResult,
}

/// Explicit steps above the stability cap would be split into substeps,
/// which hides the requested step size; halve the whole ladder until its
/// largest member is stable. Halving keeps the level ratios intact.
fn stable_ladder(levels: &[f64], cap: f64) -> Vec<f64> {
    let largest = levels.iter().copied().fold(0.0, f64::max);
    let mut scale = 1.0;
    while largest * scale > cap {
        scale *= 0.5;
    }
    levels.iter().map(|d| d * scale).collect()
}

/// Error-versus-step slopes of RK4, IMEX1 and IMEX4 against the closed-form
/// manufactured solution, at time `spec.t_end`.
pub fn manufactured_convergence(spec: &ExperimentSpec) -> Result<Vec<ManufacturedOutcome>> {
    let surface = spec.build_surface()?;
    let exact = Arc::new(ManufacturedSolution::new(&surface, MANUFACTURED_AMPLITUDE));
    let forcing: Arc<dyn Forcing> = exact.clone();
    let u0 = exact.exact(0.0);
    let target = exact.exact(spec.t_end);

    [Integrator::Rk4, Integrator::Imex1, Integrator::Imex4]
        .into_iter()
        .map(|integrator| {
            let dt_levels = match integrator {
                Integrator::Rk4 => {
                    let cfg = FlowConfig::default();
                    stable_ladder(&spec.dt_levels, cfl_step(&u0, cfg.cfl_safety))
                }
                _ => spec.dt_levels.clone(),
            };
            let errors: Vec<Result<f64>> = par::map(&dt_levels, |&dt| {
                let cfg =
                    FlowConfig::new(integrator, dt, spec.t_end).with_forcing(Arc::clone(&forcing));
                let end = evolve_with(&u0, &cfg, |_, _, _| {})?;
                Ok(end.sub(&target)?.sup_norm())
            });
            let errors = errors.into_iter().collect::<Result<Vec<_>>>()?;
            let fit = convergence_order(&dt_levels, &errors)?;
            Ok(ManufacturedOutcome {
                integrator,
                dt_levels,
                errors,
                fit,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_halves_until_stable() {
        assert_eq!(
            stable_ladder(&[4e-3, 2e-3, 1e-3], 1.1e-3),
            vec![1e-3, 5e-4, 2.5e-4]
        );
        assert_eq!(stable_ladder(&[1e-3], 1.0), vec![1e-3]);
    }
}
