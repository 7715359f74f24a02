//! Per-time and cumulative scalars of a solution: volume, Liouville energy,
//! dissipation, Gauss curvature, and residuals of the energy identity and of
//! the weak formulation.
//!
//! Space integrals use the surface quadrature; time integrals use the
//! composite trapezoid rule over stored states, so drive these from
//! trajectories stored at every step.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::geometry::io::fmt_f64;
use crate::geometry::ScalarField;
use crate::par;

pub const CSV_HEADER: &str =
    "t,volume,energy,dissipation_cum,energy_residual,curv_dev_linf,curv_dev_l2,rg";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub volume: f64,
    pub energy: f64,
    pub dissipation_cum: f64,
    pub energy_residual: f64,
    pub curv_dev_linf: f64,
    pub curv_dev_l2: f64,
    /// Mean scalar curvature `2 kbar / vol_g`.
    pub rg: f64,
}

/// `int exp(2u) dmu`.
pub fn volume(u: &ScalarField) -> f64 {
    u.integrate_map(|v| (2.0 * v).exp())
}

/// `1/2 int (|grad u|^2 + 2 kbar u) dmu`.
pub fn liouville_energy(u: &ScalarField, kbar: f64) -> f64 {
    0.5 * u.dirichlet_energy() + kbar * u.integrate()
}

/// `K_g = exp(-2u) (kbar - Lap u)`.
pub fn gauss_curvature(u: &ScalarField) -> ScalarField {
    let kbar = u.surface().kbar();
    let lap = u.laplacian();
    u.zip_map(&lap, |v, l| (-2.0 * v).exp() * (kbar - l))
        .expect("laplacian shares the surface")
}

/// `int K_g dmu_g - 2 pi chi`, which vanishes by Gauss–Bonnet.
pub fn gauss_bonnet_check(u: &ScalarField) -> f64 {
    let k = gauss_curvature(u);
    let total: f64 = u
        .surface()
        .weights()
        .iter()
        .zip(k.values().iter().zip(u.values()))
        .map(|(w, (kg, v))| w * kg * (2.0 * v).exp())
        .sum();
    total - 2.0 * PI * u.kind().euler_characteristic() as f64
}

/// `(||K_g - kbar||_inf, ||K_g - kbar||_{L^2(dmu_g)})`.
pub fn curvature_deviation(u: &ScalarField) -> (f64, f64) {
    let kbar = u.surface().kbar();
    let k = gauss_curvature(u);
    let linf = k
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max((v - kbar).abs()));
    let l2sq: f64 = u
        .surface()
        .weights()
        .iter()
        .zip(k.values().iter().zip(u.values()))
        .map(|(w, (kg, v))| w * (kg - kbar).powi(2) * (2.0 * v).exp())
        .sum();
    (linf, l2sq.sqrt())
}

/// `int exp(2u) |du/dt|^2 dmu` at one stored state.
fn dissipation_density(u: &ScalarField, dudt: &ScalarField) -> f64 {
    u.surface()
        .weights()
        .iter()
        .zip(u.values().iter().zip(dudt.values()))
        .map(|(w, (v, d))| w * (2.0 * v).exp() * d * d)
        .sum()
}

/// Composite trapezoid weights for the given nodes.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 1..n {
        let h = 0.5 * (times[k] - times[k - 1]);
        w[k - 1] += h;
        w[k] += h;
    }
    w
}

/// Running trapezoid integral of samples `f` at `times`.
pub fn cumulative_trapezoid(times: &[f64], f: &[f64]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(f.len());
    let mut sum = 0.0;
    for k in 0..f.len() {
        if k > 0 {
            sum += 0.5 * (times[k] - times[k - 1]) * (f[k] + f[k - 1]);
        }
        acc.push(sum);
    }
    acc
}

/// `E(u(t)) - E(u0) + int_0^t int exp(2u) |du/dt|^2`, per stored time, with
/// `du/dt` the stored right-hand side.
pub fn energy_identity_residual(traj: &Trajectory) -> Vec<f64> {
    diagnostics(traj)
        .iter()
        .map(|r| r.energy_residual)
        .collect()
}

/// Per-state quantities that do not depend on the history.
#[derive(Debug, Clone, Copy)]
struct Pointwise {
    volume: f64,
    energy: f64,
    dissipation: f64,
    curv_dev: (f64, f64),
}

fn pointwise(u: &ScalarField, dudt: &ScalarField) -> Pointwise {
    Pointwise {
        volume: volume(u),
        energy: liouville_energy(u, u.surface().kbar()),
        dissipation: dissipation_density(u, dudt),
        curv_dev: curvature_deviation(u),
    }
}

/// Builds [`DiagnosticsRecord`]s one stored state at a time, for runs driven
/// by [`crate::flow::evolve_with`] that never hold the full trajectory.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsAccumulator {
    records: Vec<DiagnosticsRecord>,
    last_dissipation: f64,
}

impl DiagnosticsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, u: &ScalarField, dudt: &ScalarField) {
        self.push_pointwise(t, pointwise(u, dudt), u.surface().kbar());
    }

    fn push_pointwise(&mut self, t: f64, p: Pointwise, kbar: f64) {
        let (e0, cum) = match self.records.last() {
            None => (p.energy, 0.0),
            Some(prev) => (
                self.records[0].energy,
                prev.dissipation_cum + 0.5 * (t - prev.t) * (p.dissipation + self.last_dissipation),
            ),
        };
        self.last_dissipation = p.dissipation;
        self.records.push(DiagnosticsRecord {
            t,
            volume: p.volume,
            energy: p.energy,
            dissipation_cum: cum,
            energy_residual: p.energy - e0 + cum,
            curv_dev_linf: p.curv_dev.0,
            curv_dev_l2: p.curv_dev.1,
            rg: 2.0 * kbar / p.volume,
        });
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord> {
        self.records
    }
}

pub fn diagnostics(traj: &Trajectory) -> Vec<DiagnosticsRecord> {
    let kbar = traj.surface().kbar();
    let points = par::map_range(traj.len(), |k| {
        pointwise(&traj.states()[k], &traj.rhs_values()[k])
    });
    let mut acc = DiagnosticsAccumulator::new();
    for (t, p) in traj.times().iter().zip(points) {
        acc.push_pointwise(*t, p, kbar);
    }
    acc.into_records()
}

pub fn write_diagnostics_csv<W: Write>(records: &[DiagnosticsRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let row = [
            r.t,
            r.volume,
            r.energy,
            r.dissipation_cum,
            r.energy_residual,
            r.curv_dev_linf,
            r.curv_dev_l2,
            r.rg,
        ]
        .map(fmt_f64)
        .join(",");
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Space-time test function `phi(t, x) = g(x) b(t)` with the polynomial bump
/// `b(t) = t^2 (T - t)^2 / (T/2)^4`, which peaks at one and vanishes at both
/// ends of `[0, T]`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    spatial: ScalarField,
    horizon: f64,
}

impl TestFunction {
    pub fn new(spatial: ScalarField, horizon: f64) -> Self {
        Self { spatial, horizon }
    }

    pub fn bump(&self, t: f64) -> f64 {
        let half = 0.5 * self.horizon;
        (t * (self.horizon - t) / (half * half)).powi(2)
    }

    pub fn spatial(&self) -> &ScalarField {
        &self.spatial
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// Source of `dv/dt` in the weak-form residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDerivative {
    /// The stored right-hand side. Then the residual only sees roundoff,
    /// because the integrands agree pointwise in time.
    Stored,
    /// Second-order divided differences of the stored states, which exposes
    /// the time-discretization error of the trajectory.
    Differenced,
}

/// Second-order divided difference of the stored states at index `k`.
fn differenced(traj: &Trajectory, k: usize) -> Vec<f64> {
    let t = traj.times();
    let s = traj.states();
    let n = t.len();
    // three-point stencil centred where possible, one-sided at the ends
    let (a, b, c) = if k == 0 {
        (0, 1, 2)
    } else if k == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (k - 1, k, k + 1)
    };
    let (ta, tb, tc, tk) = (t[a], t[b], t[c], t[k]);
    // derivative of the Lagrange interpolant through (ta, tb, tc) at tk
    let la = ((tk - tb) + (tk - tc)) / ((ta - tb) * (ta - tc));
    let lb = ((tk - ta) + (tk - tc)) / ((tb - ta) * (tb - tc));
    let lc = ((tk - ta) + (tk - tb)) / ((tc - ta) * (tc - tb));
    (0..s[k].len())
        .map(|i| la * s[a].values()[i] + lb * s[b].values()[i] + lc * s[c].values()[i])
        .collect()
}

/// `|int int dv/dt exp(2v) phi + int int (<grad v, grad phi> - kbar (exp(2v) - 1) phi)|`
/// over `[0, T]`, with `dv/dt` from divided differences (see
/// [`weak_form_residual_with`]).
pub fn weak_form_residual(traj: &Trajectory, phi: &TestFunction) -> Result<f64> {
    weak_form_residual_with(traj, phi, TimeDerivative::Differenced)
}

pub fn weak_form_residual_with(
    traj: &Trajectory,
    phi: &TestFunction,
    derivative: TimeDerivative,
) -> Result<f64> {
    let surface = traj.surface();
    if !phi.spatial.surface().same_shape(surface) {
        return Err(Error::GridMismatch(
            "test function lives on another surface".into(),
        ));
    }
    if (phi.horizon - traj.final_time()).abs() > 1e-9 * phi.horizon.max(1.0) {
        return Err(Error::HorizonNotStored(phi.horizon));
    }
    if derivative == TimeDerivative::Differenced && traj.len() < 3 {
        return Err(Error::GridMismatch(
            "divided differences need three stored states".into(),
        ));
    }
    let kbar = surface.kbar();
    let weights = surface.weights();
    let g = phi.spatial.values();
    let grad_g: Vec<ScalarField> = par::map(traj.states(), |v| {
        v.grad_dot(&phi.spatial).expect("same surface")
    });
    let per_time: Vec<f64> = par::map_range(traj.len(), |k| {
        let b = phi.bump(traj.times()[k]);
        if b == 0.0 {
            return 0.0;
        }
        let v = traj.states()[k].values();
        let dvdt = match derivative {
            TimeDerivative::Stored => traj.rhs_values()[k].values().to_vec(),
            TimeDerivative::Differenced => differenced(traj, k),
        };
        let gd = grad_g[k].values();
        let mut acc = 0.0;
        for i in 0..v.len() {
            let e = (2.0 * v[i]).exp();
            let lhs = dvdt[i] * e * g[i];
            let rhs = -(gd[i] - kbar * (e - 1.0) * g[i]);
            acc += weights[i] * (lhs - rhs);
        }
        b * acc
    });
    let tw = trapezoid_weights(traj.times());
    Ok(tw
        .iter()
        .zip(&per_time)
        .map(|(w, r)| w * r)
        .sum::<f64>()
        .abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{evolve, normalize_volume, FlowConfig, Integrator};
    use crate::geometry::{build_surface, SurfaceKind};
    use std::sync::Arc;

    fn torus(n: usize) -> Arc<crate::geometry::BackgroundSurface> {
        build_surface(SurfaceKind::FlatTorus, n).unwrap()
    }

    #[test]
    fn volume_examples() {
        let t = torus(32);
        assert_eq!(volume(&ScalarField::zeros(&t)), 1.0);
        let v = volume(&ScalarField::constant(&t, 0.5 * 2f64.ln()));
        assert!((v - 2.0).abs() < 1e-14);
        let u = normalize_volume(&ScalarField::from_fn(&t, |x, _| (2.0 * PI * x).sin()));
        assert!((volume(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let t = torus(64);
        assert_eq!(liouville_energy(&ScalarField::zeros(&t), 0.0), 0.0);
        let u = ScalarField::from_fn(&t, |x, _| (2.0 * PI * x).sin());
        assert!((liouville_energy(&u, 0.0) - PI * PI).abs() < 1e-10);
        let s = build_surface(SurfaceKind::RoundSphere, 9).unwrap();
        let c = ScalarField::constant(&s, 0.3);
        assert!((liouville_energy(&c, s.kbar()) - 4.0 * PI * 0.3).abs() < 1e-12);
    }

    #[test]
    fn curvature_examples() {
        let t = torus(64);
        let u = ScalarField::from_fn(&t, |x, _| 0.1 * (2.0 * PI * x).sin());
        let k = gauss_curvature(&u);
        for i in 0..t.node_count() {
            let s = (2.0 * PI * t.node_coords(i).0).sin();
            let want = (-0.2 * s).exp() * 0.4 * PI * PI * s;
            assert!((k.values()[i] - want).abs() < 1e-9);
        }
        let (linf, _) = curvature_deviation(&u);
        assert!((linf - k.sup_norm()).abs() < 1e-15);

        let s = build_surface(SurfaceKind::RoundSphere, 9).unwrap();
        let c = 0.2;
        let (linf, l2) = curvature_deviation(&ScalarField::constant(&s, c));
        assert!((linf - ((-2.0 * c).exp() - 1.0).abs() * 4.0 * PI).abs() < 1e-12);
        assert!(l2 > 0.0);
        assert_eq!(curvature_deviation(&ScalarField::zeros(&s)), (0.0, 0.0));
    }

    #[test]
    fn gauss_bonnet_examples() {
        let t = torus(32);
        let u = ScalarField::from_fn(&t, |x, y| (2.0 * PI * x).sin() * (4.0 * PI * y).cos());
        assert!(gauss_bonnet_check(&u).abs() < 1e-12);
        let s = build_surface(SurfaceKind::RoundSphere, 15).unwrap();
        assert!(gauss_bonnet_check(&ScalarField::zeros(&s)).abs() < 1e-12);
        let u = ScalarField::from_fn(&s, |th, ph| {
            0.2 * th.cos() + 0.1 * th.sin().powi(2) * (2.0 * ph).cos()
        });
        assert!(gauss_bonnet_check(&u).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_helpers() {
        let t = [0.0, 0.5, 1.0, 2.0];
        assert_eq!(trapezoid_weights(&t), vec![0.25, 0.5, 0.75, 0.5]);
        let f: Vec<f64> = t.iter().map(|x| 2.0 * x).collect();
        assert_eq!(cumulative_trapezoid(&t, &f), vec![0.0, 0.25, 1.0, 4.0]);
    }

    #[test]
    fn zero_trajectory_has_zero_residuals() {
        let t = torus(16);
        let traj = evolve(
            &ScalarField::zeros(&t),
            &FlowConfig::new(Integrator::Rk4, 0.01, 0.1),
        )
        .unwrap();
        assert!(energy_identity_residual(&traj)
            .iter()
            .all(|r| r.abs() < 1e-13));
        let g = ScalarField::from_fn(&t, |x, y| (2.0 * PI * x).cos() + (2.0 * PI * y).sin());
        let phi = TestFunction::new(g, 0.1);
        assert!(weak_form_residual(&traj, &phi).unwrap() < 1e-12);
        let zero = TestFunction::new(ScalarField::zeros(&t), 0.1);
        let u0 = ScalarField::from_fn(&t, |x, _| 0.1 * (2.0 * PI * x).sin());
        let traj = evolve(&u0, &FlowConfig::new(Integrator::Imex1, 0.01, 0.1)).unwrap();
        assert_eq!(weak_form_residual(&traj, &zero).unwrap(), 0.0);
    }

    #[test]
    fn records_are_consistent() {
        let t = torus(16);
        let u0 = normalize_volume(&ScalarField::from_fn(&t, |x, y| {
            0.2 * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
        }));
        let traj = evolve(&u0, &FlowConfig::new(Integrator::Imex4, 0.01, 0.2)).unwrap();
        let recs = diagnostics(&traj);
        assert_eq!(recs.len(), traj.len());
        for w in recs.windows(2) {
            assert!(w[1].dissipation_cum >= w[0].dissipation_cum);
            assert!(w[1].energy <= w[0].energy + 1e-10);
        }
        let mut streamed = DiagnosticsAccumulator::new();
        for k in 0..traj.len() {
            streamed.push(traj.times()[k], &traj.states()[k], &traj.rhs_values()[k]);
        }
        assert_eq!(streamed.records(), recs.as_slice());
        let mut out = Vec::new();
        write_diagnostics_csv(&recs, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), recs.len() + 1);
    }
}
