use std::f64::consts::PI;
use std::sync::Arc;

use super::Forcing;
use crate::geometry::{BackgroundSurface, ScalarField, SurfaceKind};

/// Exact solution `u*(t) = a0 exp(-t) phi` of the forced flow, with `phi` a
/// fixed Laplacian eigenfunction: `sin(2 pi x)` on the torus, the unit-norm
/// `l = 1` zonal harmonic on the sphere.
///
/// The forcing is projected onto the resolved modes, so `u*` solves the
/// semi-discrete system exactly and measured errors are pure time error.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    amplitude: f64,
    mode: ScalarField,
    eigenvalue: f64,
}

impl ManufacturedSolution {
    pub fn new(surface: &Arc<BackgroundSurface>, amplitude: f64) -> Self {
        let (mode, eigenvalue) = match surface.kind() {
            SurfaceKind::FlatTorus => (
                ScalarField::from_fn(surface, |x, _| (2.0 * PI * x).sin()),
                -4.0 * PI * PI,
            ),
            SurfaceKind::RoundSphere => (
                ScalarField::from_fn(surface, |theta, _| 3f64.sqrt() * theta.cos()),
                -8.0 * PI,
            ),
        };
        Self {
            amplitude,
            mode,
            eigenvalue,
        }
    }

    fn coefficient(&self, t: f64) -> f64 {
        self.amplitude * (-t).exp()
    }

    pub fn exact(&self, t: f64) -> ScalarField {
        self.mode.scale(self.coefficient(t))
    }
}

impl Forcing for ManufacturedSolution {
    fn eval(&self, t: f64, surface: &Arc<BackgroundSurface>) -> ScalarField {
        debug_assert!(surface.same_shape(self.mode.surface()));
        let a = self.coefficient(t);
        let kbar = surface.kbar();
        let lambda = self.eigenvalue;
        // du*/dt - exp(-2u*) Lap u* - kbar (1 - exp(-2u*)), with da/dt = -a
        let raw = self.mode.map(|phi| {
            let e = (-2.0 * a * phi).exp();
            -a * phi - e * a * lambda * phi - kbar * (1.0 - e)
        });
        raw.project()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::eval_rhs;
    use crate::geometry::build_surface;

    #[test]
    fn exact_solution_balances_forcing() {
        for (kind, res) in [(SurfaceKind::FlatTorus, 16), (SurfaceKind::RoundSphere, 9)] {
            let s = build_surface(kind, res).unwrap();
            let m = ManufacturedSolution::new(&s, 0.1);
            let t = 0.3;
            let u = m.exact(t);
            let rhs = eval_rhs(&u, s.kbar()).unwrap();
            let f = m.eval(t, &s);
            let dudt = m.exact(t).scale(-1.0);
            let residual = rhs.add(&f).unwrap().sub(&dudt).unwrap();
            assert!(
                residual.sup_norm() < 1e-12,
                "{kind}: {}",
                residual.sup_norm()
            );
        }
    }

    #[test]
    fn sphere_mode_is_an_eigenfunction() {
        let s = build_surface(SurfaceKind::RoundSphere, 9).unwrap();
        let m = ManufacturedSolution::new(&s, 1.0);
        let phi = m.exact(0.0);
        let lap = phi.laplacian();
        let err = lap.sub(&phi.scale(-8.0 * PI)).unwrap().sup_norm();
        assert!(err < 1e-10, "{err}");
        assert!((phi.l2_norm() - 1.0).abs() < 1e-12);
    }
}
