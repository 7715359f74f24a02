use crate::diagnostics::{DiagnosticsAccumulator, DiagnosticsRecord};
use crate::error::Result;
use crate::flow::{evolve_with, FlowConfig};

use super::{fit_line, ExperimentSpec, FitResult};

/// Curvature deviations below this count as already constant.
pub const CONSTANT_CURVATURE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceStatus {
    /// Negative fitted slope.
    Decaying,
    /// Initial data already has constant curvature; no fit attempted.
    AlreadyConstant,
    /// Fitted slope is nonnegative.
    NotDecaying,
}

impl ConvergenceStatus {
    pub fn name(self) -> &'static str {
        match self {
            ConvergenceStatus::Decaying => "decaying",
            ConvergenceStatus::AlreadyConstant => "already_constant",
            ConvergenceStatus::NotDecaying => "not_decaying",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub records: Vec<DiagnosticsRecord>,
    /// Fit of `log ||K_g - kbar||_inf` against `t` over `[t_end/2, t_end]`.
    pub fit: Option<FitResult>,
    pub status: ConvergenceStatus,
}

/// Evolve random data with `spec.integrator` at the finest `dt` and fit the
/// exponential decay of the curvature deviation over the second half of the
/// run.
pub fn convergence_to_constant_curvature(spec: &ExperimentSpec) -> Result<ConvergenceOutcome> {
    let surface = spec.build_surface()?;
    let u0 = spec.initial_data(&surface)?;
    let cfg = FlowConfig::new(spec.integrator, spec.finest_dt()?, spec.t_end);
    let mut acc = DiagnosticsAccumulator::new();
    evolve_with(&u0, &cfg, |t, u, dudt| acc.push(t, u, dudt))?;
    let records = acc.into_records();

    if records[0].curv_dev_linf < CONSTANT_CURVATURE_FLOOR {
        return Ok(ConvergenceOutcome {
            records,
            fit: None,
            status: ConvergenceStatus::AlreadyConstant,
        });
    }
    let (ts, logs): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.t >= 0.5 * spec.t_end)
        .map(|r| (r.t, r.curv_dev_linf.max(f64::MIN_POSITIVE).ln()))
        .unzip();
    let fit = fit_line(&ts, &logs)?;
    let status = if fit.slope < 0.0 {
        ConvergenceStatus::Decaying
    } else {
        ConvergenceStatus::NotDecaying
    };
    Ok(ConvergenceOutcome {
        records,
        fit: Some(fit),
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Integrator;

    #[test]
    fn constant_data_skips_the_fit() {
        let spec = ExperimentSpec {
            resolution: 16,
            initial_amplitude: 0.0,
            dt_levels: vec![0.05],
            t_end: 0.2,
            ..ExperimentSpec::default()
        };
        let out = convergence_to_constant_curvature(&spec).unwrap();
        assert_eq!(out.status, ConvergenceStatus::AlreadyConstant);
        assert!(out.fit.is_none());
    }

    #[test]
    fn short_run_decays() {
        let spec = ExperimentSpec {
            resolution: 16,
            band_limit: 2,
            initial_amplitude: 0.2,
            dt_levels: vec![0.005],
            t_end: 0.2,
            integrator: Integrator::Imex4,
            ..ExperimentSpec::default()
        };
        let out = convergence_to_constant_curvature(&spec).unwrap();
        assert_eq!(out.status, ConvergenceStatus::Decaying);
        assert!(out.fit.unwrap().correlation < -0.99);
    }
}
