use std::sync::Arc;

use crate::error::Result;
use crate::estimates::{exp_moment, gn_ratio, space_time_sobolev_ratio, tm_ratio};
use crate::flow::{evolve, normalize_volume, FlowConfig, Integrator};
use crate::geometry::{BackgroundSurface, ScalarField};
use crate::par;

use super::{random_field, stream_rng, ExperimentSpec};

pub const MOMENT_EXPONENTS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Horizon and step of the short trajectories behind the space-time ratio.
const SHORT_HORIZON: f64 = 0.1;
const SHORT_DT: f64 = 0.005;

/// Streams below this offset belong to field samples, above it to
/// trajectory samples.
const TRAJECTORY_STREAM: u64 = 1 << 32;

/// Sampled maxima on one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalitySummary {
    pub resolution: usize,
    pub samples: usize,
    pub trajectories: usize,
    pub gn_max: f64,
    pub tm_max: f64,
    pub space_time_max: f64,
    /// `max exp_moment(f, p)` and `max exp_moment(-f, p)` for each exponent.
    pub moment_max: Vec<(f64, f64, f64)>,
    pub all_finite: bool,
}

impl InequalitySummary {
    /// Empirical constant used for every unnamed Sobolev-type constant in the
    /// smallness factors.
    pub fn sobolev_constant(&self) -> f64 {
        self.gn_max.max(self.space_time_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSummary {
    pub per_resolution: Vec<InequalitySummary>,
}

impl CampaignSummary {
    /// `max/min - 1` of the GN maxima across resolutions.
    pub fn gn_spread(&self) -> f64 {
        let maxima = self.per_resolution.iter().map(|s| s.gn_max);
        let hi = maxima.clone().fold(f64::NEG_INFINITY, f64::max);
        let lo = maxima.fold(f64::INFINITY, f64::min);
        hi / lo - 1.0
    }
}

/// A sample field: random band in `1..=band_limit`, random amplitude in
/// `(0, amplitude]`, plus a random constant offset.
/// GN ratio, TM ratio and `(plus, minus)` exponential moments of one field.
type FieldSample = (f64, f64, Vec<(f64, f64)>);

fn sample_field(
    surface: &Arc<BackgroundSurface>,
    seed: u64,
    index: u64,
    spec: &ExperimentSpec,
) -> Result<ScalarField> {
    use rand::Rng;
    let mut rng = stream_rng(seed, index);
    let band = rng.random_range(1..=spec.band_limit.max(1));
    let amplitude = spec.initial_amplitude.max(1e-3) * rng.random_range(0.05..=1.0);
    let offset = amplitude * rng.random_range(-1.0..=1.0);
    Ok(random_field(surface, &mut rng, band, amplitude)?.map(|v| v + offset))
}

/// Sample the Gagliardo–Nirenberg, Trudinger–Moser and space-time Sobolev
/// ratios and the exponential moments on `surface`.
pub fn measure_inequalities(
    spec: &ExperimentSpec,
    surface: &Arc<BackgroundSurface>,
) -> Result<InequalitySummary> {
    let fields: Vec<Result<FieldSample>> = par::map_range(spec.samples, |i| {
        let f = sample_field(surface, spec.seed, i as u64 + 1, spec)?;
        let moments = MOMENT_EXPONENTS
            .iter()
            .map(|&p| Ok((exp_moment(&f, p)?, exp_moment(&f.scale(-1.0), p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((gn_ratio(&f)?, tm_ratio(&f)?, moments))
    });
    let fields = fields.into_iter().collect::<Result<Vec<_>>>()?;

    let trajectories: Vec<Result<f64>> = par::map_range(spec.trajectory_samples, |j| {
        let f = sample_field(surface, spec.seed, TRAJECTORY_STREAM + j as u64, spec)?;
        let u0 = normalize_volume(&f);
        let traj = evolve(
            &u0,
            &FlowConfig::new(Integrator::Imex4, SHORT_DT, SHORT_HORIZON),
        )?;
        space_time_sobolev_ratio(&traj)
    });
    let trajectories = trajectories.into_iter().collect::<Result<Vec<_>>>()?;

    let mut moment_max: Vec<(f64, f64, f64)> =
        MOMENT_EXPONENTS.iter().map(|&p| (p, 0.0, 0.0)).collect();
    for (_, _, m) in &fields {
        for (slot, (plus, minus)) in moment_max.iter_mut().zip(m) {
            slot.1 = slot.1.max(*plus);
            slot.2 = slot.2.max(*minus);
        }
    }
    let gn_max = fields.iter().map(|f| f.0).fold(0.0, f64::max);
    let tm_max = fields.iter().map(|f| f.1).fold(0.0, f64::max);
    let space_time_max = trajectories.iter().copied().fold(0.0, f64::max);
    let all_finite = fields.iter().all(|(g, t, m)| {
        g.is_finite() && t.is_finite() && m.iter().all(|(a, b)| a.is_finite() && b.is_finite())
    }) && trajectories.iter().all(|r| r.is_finite());
    Ok(InequalitySummary {
        resolution: surface.resolution(),
        samples: spec.samples,
        trajectories: spec.trajectory_samples,
        gn_max,
        tm_max,
        space_time_max,
        moment_max,
        all_finite,
    })
}

/// [`measure_inequalities`] at each resolution, with identical seeds so the
/// sampled continuum fields agree across resolutions.
pub fn inequality_campaign(
    spec: &ExperimentSpec,
    resolutions: &[usize],
) -> Result<CampaignSummary> {
    let per_resolution = resolutions
        .iter()
        .map(|&r| {
            let surface = crate::geometry::build_surface(spec.surface, r)?;
            measure_inequalities(spec, &surface)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CampaignSummary { per_resolution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::gn_ratio;
    use crate::geometry::{build_surface, SurfaceKind};

    #[test]
    fn constants_have_unit_gn_ratio() {
        let t = build_surface(SurfaceKind::FlatTorus, 16).unwrap();
        for c in [-2.0, 0.1, 5.0] {
            assert!((gn_ratio(&ScalarField::constant(&t, c)).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn small_campaign_is_finite_and_deterministic() {
        let spec = ExperimentSpec {
            samples: 30,
            trajectory_samples: 2,
            band_limit: 3,
            ..ExperimentSpec::default()
        };
        let a = inequality_campaign(&spec, &[16, 32]).unwrap();
        let b = inequality_campaign(&spec, &[16, 32]).unwrap();
        assert_eq!(a, b);
        for s in &a.per_resolution {
            assert!(s.all_finite);
            assert!(s.gn_max > 0.0 && s.gn_max.is_finite());
            assert!(s.sobolev_constant() >= s.gn_max);
        }
        assert!(a.gn_spread() < 0.25);
    }
}
