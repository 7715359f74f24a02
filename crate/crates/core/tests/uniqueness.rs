//! Discrete analogues of the uniqueness argument on small grids.

use ricci_core::estimates::PairAnalysis;
use ricci_core::experiments::ExperimentSpec;
use ricci_core::flow::{evolve, FlowConfig, Integrator};

fn spec() -> ExperimentSpec {
    ExperimentSpec {
        resolution: 16,
        t_end: 0.2,
        ..ExperimentSpec::default()
    }
}

/// With the reference fixed, refining the candidate drives `w_-` and hence
/// `sup_t psi` toward zero.
#[test]
fn psi_shrinks_as_the_step_shrinks() {
    let spec = spec();
    let s = spec.build_surface().unwrap();
    let u0 = spec.initial_data(&s).unwrap();
    let mut previous = f64::INFINITY;
    for dt in [0.02, 0.01, 0.005] {
        let u = evolve(&u0, &FlowConfig::new(Integrator::Imex4, dt, spec.t_end)).unwrap();
        let v = evolve(&u0, &FlowConfig::new(Integrator::Imex1, dt, spec.t_end)).unwrap();
        let report = PairAnalysis::new(&u, &v)
            .unwrap()
            .report(spec.t_end, 0.25)
            .unwrap();
        assert!(
            report.psi_max < previous,
            "dt {dt}: {} !< {previous}",
            report.psi_max
        );
        assert!(report.psi_bound_holds());
        assert!(report.chain_holds(), "{}", report.to_key_value_text());
        previous = report.psi_max;
    }
}

/// Small horizons land in the contraction regime.
#[test]
fn small_horizon_contracts() {
    let spec = spec();
    let s = spec.build_surface().unwrap();
    let u0 = spec.initial_data(&s).unwrap();
    let u = evolve(&u0, &FlowConfig::new(Integrator::Imex4, 0.005, spec.t_end)).unwrap();
    let v = evolve(&u0, &FlowConfig::new(Integrator::Imex1, 0.005, spec.t_end)).unwrap();
    let analysis = PairAnalysis::new(&u, &v).unwrap();
    let short = analysis.report(0.05, 0.25).unwrap();
    let long = analysis.report(0.2, 0.25).unwrap();
    assert!(short.contraction_satisfied);
    assert!(short.delta <= long.delta);
}
