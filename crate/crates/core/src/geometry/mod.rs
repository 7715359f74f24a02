//! Constant-curvature background surfaces of unit area and scalar fields on
//! them.
//!
//! Two backgrounds are supported: the flat torus `[0,1)^2` (`kbar = 0`) and the
//! round sphere with `4 pi r^2 = 1` (`kbar = 4 pi`). Fields are stored as nodal
//! values; spectral space is entered only inside operators.

mod field;
pub mod io;
pub(crate) mod sphere;
pub(crate) mod torus;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use field::ScalarField;
pub(crate) use sphere::{SphCoeffs, SphereGrid};
pub(crate) use torus::TorusGrid;

pub const MIN_TORUS_RESOLUTION: usize = 8;
pub const MIN_SPHERE_DEGREE: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    FlatTorus,
    RoundSphere,
}

impl SurfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::FlatTorus => "torus",
            SurfaceKind::RoundSphere => "sphere",
        }
    }

    /// Euler characteristic of the underlying closed surface.
    pub fn euler_characteristic(self) -> i32 {
        match self {
            SurfaceKind::FlatTorus => 0,
            SurfaceKind::RoundSphere => 2,
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            SurfaceKind::FlatTorus => 0,
            SurfaceKind::RoundSphere => 1,
        }
    }

    pub(crate) fn from_tag(tag: u64) -> Result<Self> {
        match tag {
            0 => Ok(SurfaceKind::FlatTorus),
            1 => Ok(SurfaceKind::RoundSphere),
            other => Err(Error::UnsupportedKind(format!("tag {other}"))),
        }
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SurfaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "torus" | "flat_torus" | "flattorus" => Ok(SurfaceKind::FlatTorus),
            "sphere" | "round_sphere" | "roundsphere" => Ok(SurfaceKind::RoundSphere),
            other => Err(Error::UnsupportedKind(other.to_string())),
        }
    }
}

#[derive(Debug)]
pub(crate) enum Grid {
    Torus(TorusGrid),
    Sphere(SphereGrid),
}

/// Unit-area constant-curvature surface with quadrature and spectral
/// Laplace–Beltrami operator. Immutable once built.
#[derive(Debug)]
pub struct BackgroundSurface {
    kind: SurfaceKind,
    resolution: usize,
    kbar: f64,
    weights: Vec<f64>,
    grid: Grid,
}

/// Build a background surface. `resolution` is the grid size `N` for the torus
/// and the harmonic degree cutoff `L` for the sphere.
pub fn build_surface(kind: SurfaceKind, resolution: usize) -> Result<Arc<BackgroundSurface>> {
    BackgroundSurface::new(kind, resolution).map(Arc::new)
}

impl BackgroundSurface {
    pub fn new(kind: SurfaceKind, resolution: usize) -> Result<Self> {
        match kind {
            SurfaceKind::FlatTorus => {
                if resolution < MIN_TORUS_RESOLUTION {
                    return Err(Error::ResolutionTooSmall {
                        kind: "torus",
                        got: resolution,
                        min: MIN_TORUS_RESOLUTION,
                    });
                }
                let grid = TorusGrid::new(resolution);
                let count = grid.node_count();
                Ok(Self {
                    kind,
                    resolution,
                    kbar: 0.0,
                    weights: vec![1.0 / count as f64; count],
                    grid: Grid::Torus(grid),
                })
            }
            SurfaceKind::RoundSphere => {
                if resolution < MIN_SPHERE_DEGREE {
                    return Err(Error::ResolutionTooSmall {
                        kind: "sphere",
                        got: resolution,
                        min: MIN_SPHERE_DEGREE,
                    });
                }
                let grid = SphereGrid::new(resolution);
                Ok(Self {
                    kind,
                    resolution,
                    kbar: 4.0 * PI,
                    weights: grid.node_weights(),
                    grid: Grid::Sphere(grid),
                })
            }
        }
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Gauss curvature of the background metric, `2 pi chi` at unit area.
    pub fn kbar(&self) -> f64 {
        self.kbar
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// Quadrature weight of each node (the area element); sums to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest magnitude of a Laplacian eigenvalue resolved by the grid.
    pub fn max_eigenvalue(&self) -> f64 {
        match &self.grid {
            Grid::Torus(t) => t.max_eigenvalue(),
            Grid::Sphere(s) => s.max_eigenvalue(),
        }
    }

    /// Largest band limit that leaves 2/3-rule headroom for quadratic products.
    pub fn max_band_limit(&self) -> usize {
        self.resolution / 3
    }

    /// Coordinates of a node: `(x, y)` on the torus, `(colatitude, longitude)`
    /// on the sphere.
    pub fn node_coords(&self, node: usize) -> (f64, f64) {
        match &self.grid {
            Grid::Torus(t) => t.coords(node),
            Grid::Sphere(s) => s.coords(node),
        }
    }

    pub(crate) fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Same kind and resolution, hence the same node set.
    pub fn same_shape(&self, other: &BackgroundSurface) -> bool {
        self.kind == other.kind && self.resolution == other.resolution
    }

    pub(crate) fn describe(&self) -> String {
        format!("{}(resolution={})", self.kind, self.resolution)
    }

    pub(crate) fn integrate_slice(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Multiply each spectral mode by `symbol(lambda)`, `lambda` the mode's
    /// Laplacian eigenvalue.
    pub(crate) fn apply_symbol(&self, values: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        match &self.grid {
            Grid::Torus(t) => t.apply_symbol(values, symbol),
            Grid::Sphere(s) => s.apply_symbol(values, symbol),
        }
    }

    pub(crate) fn laplacian_slice(&self, values: &[f64]) -> Vec<f64> {
        self.apply_symbol(values, |lambda| lambda)
    }

    /// Projection onto the resolved spectral space. The torus grid is in
    /// bijection with its Fourier modes, so this is the identity there.
    pub(crate) fn project_slice(&self, values: Vec<f64>) -> Vec<f64> {
        match &self.grid {
            Grid::Torus(_) => values,
            Grid::Sphere(s) => s.synthesis(&s.analysis(&values)),
        }
    }

    /// Pointwise `<grad f, grad h>`.
    pub(crate) fn grad_dot_slice(&self, f: &[f64], h: &[f64]) -> Vec<f64> {
        match &self.grid {
            Grid::Torus(t) => {
                let (fx, fy) = t.gradient(f);
                if std::ptr::eq(f, h) {
                    return fx.iter().zip(&fy).map(|(a, b)| a * a + b * b).collect();
                }
                let (hx, hy) = t.gradient(h);
                (0..f.len())
                    .map(|i| fx[i] * hx[i] + fy[i] * hy[i])
                    .collect()
            }
            Grid::Sphere(s) => {
                // <grad f, grad h> = (Lap(fh) - f Lap h - h Lap f) / 2
                let fh: Vec<f64> = f.iter().zip(h).map(|(a, b)| a * b).collect();
                let lap_fh = s.apply_symbol(&fh, |l| l);
                let lap_f = s.apply_symbol(f, |l| l);
                let lap_h = if std::ptr::eq(f, h) {
                    lap_f.clone()
                } else {
                    s.apply_symbol(h, |l| l)
                };
                (0..f.len())
                    .map(|i| 0.5 * (lap_fh[i] - f[i] * lap_h[i] - h[i] * lap_f[i]))
                    .collect()
            }
        }
    }

    pub(crate) fn truncate_slice(&self, values: &[f64], band: usize) -> Vec<f64> {
        match &self.grid {
            Grid::Torus(t) => t.truncate(values, band),
            Grid::Sphere(s) => s.truncate(values, band),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_weights_are_uniform() {
        let s = build_surface(SurfaceKind::FlatTorus, 64).unwrap();
        assert_eq!(s.kbar(), 0.0);
        assert!(s.weights().iter().all(|&w| w == 1.0 / 4096.0));
    }

    #[test]
    fn sphere_curvature_and_weights() {
        let s = build_surface(SurfaceKind::RoundSphere, 31).unwrap();
        assert!((s.kbar() - 12.566370614359172).abs() < 1e-12);
        let total: f64 = s.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14, "{total}");
    }

    #[test]
    fn gauss_bonnet_for_background() {
        for (kind, res) in [(SurfaceKind::FlatTorus, 16), (SurfaceKind::RoundSphere, 9)] {
            let s = build_surface(kind, res).unwrap();
            let chi = kind.euler_characteristic() as f64;
            let total: f64 = s.weights().iter().map(|w| w * s.kbar()).sum();
            assert!((total - 2.0 * PI * chi).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_small_resolutions() {
        assert!(matches!(
            build_surface(SurfaceKind::FlatTorus, 7),
            Err(Error::ResolutionTooSmall { min: 8, .. })
        ));
        assert!(matches!(
            build_surface(SurfaceKind::RoundSphere, 6),
            Err(Error::ResolutionTooSmall { min: 7, .. })
        ));
        assert!(build_surface(SurfaceKind::RoundSphere, 7).is_ok());
    }

    #[test]
    fn rejects_unknown_kind() {
        assert!(matches!(
            "hyperbolic".parse::<SurfaceKind>(),
            Err(Error::UnsupportedKind(_))
        ));
        assert_eq!(
            "Sphere".parse::<SurfaceKind>().unwrap(),
            SurfaceKind::RoundSphere
        );
    }
}
