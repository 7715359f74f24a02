use std::sync::Arc;

use super::{BackgroundSurface, Grid, SurfaceKind};
use crate::error::{Error, Result};

/// Real function sampled at the nodes of a background surface.
#[derive(Debug, Clone)]
pub struct ScalarField {
    surface: Arc<BackgroundSurface>,
    values: Vec<f64>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.surface.same_shape(&other.surface) && self.values == other.values
    }
}

impl ScalarField {
    /// Wrap nodal values, rejecting wrong lengths and non-finite entries.
    pub fn from_values(surface: &Arc<BackgroundSurface>, values: Vec<f64>) -> Result<Self> {
        if values.len() != surface.node_count() {
            return Err(Error::ShapeMismatch {
                surface: surface.describe(),
                expected: surface.node_count(),
                got: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self {
            surface: Arc::clone(surface),
            values,
        })
    }

    /// Internal constructor for values known to have the right shape.
    pub(crate) fn from_raw(surface: &Arc<BackgroundSurface>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), surface.node_count());
        Self {
            surface: Arc::clone(surface),
            values,
        }
    }

    pub fn zeros(surface: &Arc<BackgroundSurface>) -> Self {
        Self::constant(surface, 0.0)
    }

    pub fn constant(surface: &Arc<BackgroundSurface>, c: f64) -> Self {
        Self::from_raw(surface, vec![c; surface.node_count()])
    }

    /// Sample `f(a, b)` at every node, with `(a, b)` as in
    /// [`BackgroundSurface::node_coords`].
    pub fn from_fn(surface: &Arc<BackgroundSurface>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..surface.node_count())
            .map(|i| {
                let (a, b) = surface.node_coords(i);
                f(a, b)
            })
            .collect();
        Self::from_raw(surface, values)
    }

    pub fn surface(&self) -> &Arc<BackgroundSurface> {
        &self.surface
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_compatible(&self, other: &ScalarField) -> Result<()> {
        if self.surface.same_shape(&other.surface) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                surface: self.surface.describe(),
                expected: self.surface.node_count(),
                got: other.values.len(),
            })
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self::from_raw(&self.surface, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_compatible(other)?;
        Ok(Self::from_raw(
            &self.surface,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    /// Spectral Laplace–Beltrami operator of the background metric.
    pub fn laplacian(&self) -> ScalarField {
        Self::from_raw(&self.surface, self.surface.laplacian_slice(&self.values))
    }

    /// Pointwise `|grad f|^2` with respect to the background metric.
    pub fn grad_norm_sq(&self) -> ScalarField {
        Self::from_raw(
            &self.surface,
            self.surface.grad_dot_slice(&self.values, &self.values),
        )
    }

    /// Pointwise `<grad f, grad h>`.
    pub fn grad_dot(&self, other: &ScalarField) -> Result<ScalarField> {
        self.check_compatible(other)?;
        Ok(Self::from_raw(
            &self.surface,
            self.surface.grad_dot_slice(&self.values, &other.values),
        ))
    }

    /// Quadrature of the field against the background area element.
    pub fn integrate(&self) -> f64 {
        self.surface.integrate_slice(&self.values)
    }

    /// `L^2` inner product.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .surface
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * a * b)
            .sum())
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        let s: f64 = self
            .surface
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.abs().powf(p))
            .sum();
        Ok(s.powf(1.0 / p))
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate_map(|v| v * v).sqrt()
    }

    /// `||grad f||_{L^2}^2`.
    pub fn dirichlet_energy(&self) -> f64 {
        self.grad_norm_sq().integrate()
    }

    pub fn h1_norm(&self) -> f64 {
        (self.integrate_map(|v| v * v) + self.dirichlet_energy()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Mean value (the background has unit area).
    pub fn mean(&self) -> f64 {
        self.integrate()
    }

    /// `integral of f(values)` without materializing the mapped field.
    pub fn integrate_map(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.surface
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, &v)| w * f(v))
            .sum()
    }

    /// Remove modes beyond `band` (max-norm wavenumber on the torus, degree on
    /// the sphere).
    pub fn truncate(&self, band: usize) -> ScalarField {
        Self::from_raw(
            &self.surface,
            self.surface.truncate_slice(&self.values, band),
        )
    }

    /// 2/3-rule dealiasing: keep modes up to one third of the resolution.
    pub fn dealias(&self) -> ScalarField {
        self.truncate(self.surface.max_band_limit())
    }

    /// Projection onto the spectral space resolved by the surface.
    pub fn project(&self) -> ScalarField {
        Self::from_raw(
            &self.surface,
            self.surface.project_slice(self.values.clone()),
        )
    }

    /// Spectral resampling (truncation or zero padding) onto another surface of
    /// the same kind.
    pub fn resample(&self, target: &Arc<BackgroundSurface>) -> Result<ScalarField> {
        let values = match (self.surface.grid(), target.grid()) {
            (Grid::Torus(a), Grid::Torus(b)) => a.resample(&self.values, b),
            (Grid::Sphere(a), Grid::Sphere(b)) => a.resample(&self.values, b),
            _ => {
                return Err(Error::GridMismatch(format!(
                    "cannot resample {} onto {}",
                    self.surface.describe(),
                    target.describe()
                )))
            }
        };
        Ok(Self::from_raw(target, values))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn kind(&self) -> SurfaceKind {
        self.surface.kind()
    }
}
