use crate::diagnostics::{diagnostics, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::estimates::{EstimateReport, PairAnalysis};
use crate::flow::{evolve, FlowConfig, Integrator};
use crate::par;

use super::inequalities::measure_inequalities;
use super::{convergence_order, ExperimentSpec, FitResult};

/// One ladder member: reference and candidate evolved from the same data.
#[derive(Debug, Clone)]
pub struct UniquenessRun {
    pub dt: f64,
    /// `max_t ||u(t) - v(t)||_inf`.
    pub discrepancy: f64,
    /// Report over the full horizon `[0, t_end]`.
    pub report: EstimateReport,
    /// Reports for every horizon of the contraction ladder; only filled on
    /// the finest run, where every horizon is a stored time.
    pub ladder: Vec<EstimateReport>,
    pub reference: Vec<DiagnosticsRecord>,
    pub candidate: Vec<DiagnosticsRecord>,
}

#[derive(Debug, Clone)]
pub struct UniquenessOutcome {
    pub reference_integrator: Integrator,
    pub candidate_integrator: Integrator,
    pub sobolev_constant: f64,
    pub runs: Vec<UniquenessRun>,
    /// `log discrepancy` against `log dt`.
    pub discrepancy_fit: FitResult,
}

impl UniquenessOutcome {
    /// Run at the finest time step; its ladder is the headline contraction
    /// ladder.
    pub fn finest(&self) -> &UniquenessRun {
        self.runs
            .iter()
            .min_by(|a, b| a.dt.total_cmp(&b.dt))
            .expect("at least one run")
    }
}

/// RK4 reference against IMEX1 candidate from identical random data, one pair
/// per entry of `spec.dt_levels`, with estimate reports at `spec.t_end` and
/// at every horizon in `spec.horizons`.
pub fn uniqueness_experiment(spec: &ExperimentSpec) -> Result<UniquenessOutcome> {
    uniqueness_with(spec, Integrator::Rk4, Integrator::Imex1)
}

pub fn uniqueness_with(
    spec: &ExperimentSpec,
    reference: Integrator,
    candidate: Integrator,
) -> Result<UniquenessOutcome> {
    if spec.dt_levels.len() < 2 {
        return Err(Error::InvalidFlowConfig(
            "uniqueness needs two or more dt levels".into(),
        ));
    }
    if let Some(&h) = spec.horizons.iter().find(|&&h| h > spec.t_end) {
        return Err(Error::InvalidFlowConfig(format!(
            "horizon {h} exceeds t_end {}",
            spec.t_end
        )));
    }
    let surface = spec.build_surface()?;
    let u0 = spec.initial_data(&surface)?;
    let sobolev_constant = measure_inequalities(spec, &surface)?.sobolev_constant();
    let finest_dt = spec.finest_dt()?;

    let runs: Vec<Result<UniquenessRun>> = par::map(&spec.dt_levels, |&dt| {
        let u = evolve(&u0, &FlowConfig::new(reference, dt, spec.t_end))?;
        let v = evolve(&u0, &FlowConfig::new(candidate, dt, spec.t_end))?;
        let discrepancy = u
            .states()
            .iter()
            .zip(v.states())
            .map(|(a, b)| a.sub(b).map(|d| d.sup_norm()))
            .try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))?;
        let analysis = PairAnalysis::new(&u, &v)?;
        let report = analysis.report(spec.t_end, sobolev_constant)?;
        let ladder = if dt == finest_dt {
            spec.horizons
                .iter()
                .map(|&h| analysis.report(h, sobolev_constant))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(UniquenessRun {
            dt,
            discrepancy,
            report,
            ladder,
            reference: diagnostics(&u),
            candidate: diagnostics(&v),
        })
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let dts: Vec<f64> = runs.iter().map(|r| r.dt).collect();
    let errs: Vec<f64> = runs.iter().map(|r| r.discrepancy).collect();
    let discrepancy_fit = convergence_order(&dts, &errs)?;
    Ok(UniquenessOutcome {
        reference_integrator: reference,
        candidate_integrator: candidate,
        sobolev_constant,
        runs,
        discrepancy_fit,
    })
}
