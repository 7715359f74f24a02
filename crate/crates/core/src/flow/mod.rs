//! Conformal-gauge normalized Ricci flow
//!
//! `du/dt = exp(-2u) Lap u + kbar (1 - exp(-2u))` for the conformal factor `u`
//! of `g = exp(2u) gbar`, with explicit (RK4), first-order semi-implicit
//! (IMEX1) and extrapolated semi-implicit (IMEX4) time stepping.
//!
//! On positively curved backgrounds the constant mode grows like
//! `exp(2 kbar t)` off the unit-volume constraint, so unforced runs there are
//! shifted back to unit volume after every step. The exact flow conserves
//! volume, so the shift only removes step error.

mod export;
mod manufactured;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BackgroundSurface, ScalarField};

pub use export::{
    read_trajectory_binary, write_trajectory_binary, write_trajectory_csv, RunMetadata,
};
pub use manufactured::ManufacturedSolution;

/// `sup |u|` above which `exp(-2u)` is considered about to overflow.
pub const BLOWUP_GUARD: f64 = 50.0;

/// Tolerance on `int exp(2 u0)` when unit volume is required.
pub const VOLUME_TOLERANCE: f64 = 1e-10;

/// Substep counts of the IMEX4 extrapolation table and the matching
/// Aitken–Neville weights for extrapolation to zero step size.
const EXTRAPOLATION_STEPS: [usize; 4] = [1, 2, 3, 4];
const EXTRAPOLATION_WEIGHTS: [f64; 4] = [-1.0 / 6.0, 4.0, -27.0 / 2.0, 32.0 / 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    /// Classical explicit Runge–Kutta, step capped by the diffusive CFL rule.
    Rk4,
    /// Linearly implicit Euler with the diffusion coefficient frozen per step.
    Imex1,
    /// IMEX1 with step counts 1..4 extrapolated to fourth order.
    Imex4,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
            Integrator::Imex1 => "imex1",
            Integrator::Imex4 => "imex4",
        }
    }

    /// Global order of accuracy.
    pub fn order(self) -> u32 {
        match self {
            Integrator::Rk4 => 4,
            Integrator::Imex1 => 1,
            Integrator::Imex4 => 4,
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rk4" => Ok(Integrator::Rk4),
            "imex1" => Ok(Integrator::Imex1),
            "imex4" => Ok(Integrator::Imex4),
            other => Err(Error::InvalidFlowConfig(format!(
                "unknown integrator `{other}`"
            ))),
        }
    }
}

/// Additive source term `f(t, x)`, used for manufactured solutions.
pub trait Forcing: Send + Sync {
    fn eval(&self, t: f64, surface: &Arc<BackgroundSurface>) -> ScalarField;
}

#[derive(Clone)]
pub struct FlowConfig {
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub forcing: Option<Arc<dyn Forcing>>,
    pub store_every: usize,
    /// Reject initial data whose volume differs from one.
    pub require_unit_volume: bool,
}

impl fmt::Debug for FlowConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowConfig")
            .field("integrator", &self.integrator)
            .field("dt", &self.dt)
            .field("t_end", &self.t_end)
            .field("cfl_safety", &self.cfl_safety)
            .field("forcing", &self.forcing.is_some())
            .field("store_every", &self.store_every)
            .field("require_unit_volume", &self.require_unit_volume)
            .finish()
    }
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            integrator: Integrator::Rk4,
            dt: 1e-3,
            t_end: 1.0,
            cfl_safety: 0.9,
            forcing: None,
            store_every: 1,
            require_unit_volume: false,
        }
    }
}

impl FlowConfig {
    pub fn new(integrator: Integrator, dt: f64, t_end: f64) -> Self {
        Self {
            integrator,
            dt,
            t_end,
            ..Self::default()
        }
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_store_every(mut self, store_every: usize) -> Self {
        self.store_every = store_every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFlowConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if self.dt > self.t_end {
            return bad(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            ));
        }
        if self.store_every == 0 {
            return bad("store_every must be positive".into());
        }
        Ok(())
    }

    /// Number of macro steps needed to reach `t_end`.
    pub fn step_count(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Time-ordered states of one run. `rhs_values[k]` is the time derivative at
/// `states[k]` (the flow right-hand side plus forcing, if any).
#[derive(Debug, Clone)]
pub struct Trajectory {
    surface: Arc<BackgroundSurface>,
    times: Vec<f64>,
    states: Vec<ScalarField>,
    rhs_values: Vec<ScalarField>,
}

impl Trajectory {
    fn new(surface: Arc<BackgroundSurface>) -> Self {
        Self {
            surface,
            times: Vec::new(),
            states: Vec::new(),
            rhs_values: Vec::new(),
        }
    }

    /// Assemble a trajectory from parts, checking ordering and shapes.
    pub fn from_parts(
        surface: Arc<BackgroundSurface>,
        times: Vec<f64>,
        states: Vec<ScalarField>,
        rhs_values: Vec<ScalarField>,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() || times.len() != rhs_values.len() {
            return Err(Error::GridMismatch(
                "times, states and rhs lengths differ".into(),
            ));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::GridMismatch(
                "times must start at 0 and increase".into(),
            ));
        }
        if states
            .iter()
            .chain(&rhs_values)
            .any(|f| !f.surface().same_shape(&surface))
        {
            return Err(Error::GridMismatch("field on a different surface".into()));
        }
        Ok(Self {
            surface,
            times,
            states,
            rhs_values,
        })
    }

    fn push(&mut self, t: f64, state: ScalarField, rhs: ScalarField) {
        self.times.push(t);
        self.states.push(state);
        self.rhs_values.push(rhs);
    }

    pub fn surface(&self) -> &Arc<BackgroundSurface> {
        &self.surface
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[ScalarField] {
        &self.states
    }

    pub fn rhs_values(&self) -> &[ScalarField] {
        &self.rhs_values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory has at least one state")
    }

    pub fn final_state(&self) -> &ScalarField {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }

    /// Index of the stored time equal to `t` within a relative tolerance.
    pub fn index_of_time(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    /// Prefix ending at stored time `t`.
    pub fn truncated(&self, t: f64) -> Result<Trajectory> {
        let k = self.index_of_time(t).ok_or(Error::HorizonNotStored(t))?;
        Ok(Trajectory {
            surface: Arc::clone(&self.surface),
            times: self.times[..=k].to_vec(),
            states: self.states[..=k].to_vec(),
            rhs_values: self.rhs_values[..=k].to_vec(),
        })
    }
}

fn check_guard(u: &ScalarField, t: f64) -> Result<()> {
    let sup = u.sup_norm();
    if !(sup <= BLOWUP_GUARD) {
        return Err(Error::BlowUp {
            t,
            sup_norm: sup,
            partial: None,
        });
    }
    Ok(())
}

/// Right-hand side and the Laplacian it was built from.
fn rhs_parts(u: &ScalarField, kbar: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_guard(u, f64::NAN)?;
    let surface = u.surface();
    let lap = surface.laplacian_slice(u.values());
    let rhs: Vec<f64> = u
        .values()
        .iter()
        .zip(&lap)
        .map(|(&v, &l)| {
            let e = (-2.0 * v).exp();
            e * l + kbar * (1.0 - e)
        })
        .collect();
    Ok((surface.project_slice(rhs), lap))
}

/// `exp(-2u) Lap u + kbar (1 - exp(-2u))`, projected onto the resolved modes.
pub fn eval_rhs(u: &ScalarField, kbar: f64) -> Result<ScalarField> {
    let (rhs, _) = rhs_parts(u, kbar)?;
    Ok(ScalarField::from_raw(u.surface(), rhs))
}

fn forced_rhs(
    u: &ScalarField,
    t: f64,
    kbar: f64,
    forcing: Option<&dyn Forcing>,
) -> Result<Vec<f64>> {
    let (mut rhs, _) = rhs_parts(u, kbar).map_err(|e| with_time(e, t))?;
    if let Some(f) = forcing {
        let f = f.eval(t, u.surface());
        rhs.iter_mut().zip(f.values()).for_each(|(r, v)| *r += v);
    }
    Ok(rhs)
}

fn with_time(err: Error, t: f64) -> Error {
    match err {
        Error::BlowUp {
            sup_norm, partial, ..
        } => Error::BlowUp {
            t,
            sup_norm,
            partial,
        },
        other => other,
    }
}

fn axpy(u: &ScalarField, h: f64, k: &[f64]) -> ScalarField {
    ScalarField::from_raw(
        u.surface(),
        u.values().iter().zip(k).map(|(a, b)| a + h * b).collect(),
    )
}

/// One classical RK4 step of size `dt` starting at time `t`.
pub fn step_rk4(
    u: &ScalarField,
    t: f64,
    dt: f64,
    kbar: f64,
    forcing: Option<&dyn Forcing>,
) -> Result<ScalarField> {
    let k1 = forced_rhs(u, t, kbar, forcing)?;
    let mut acc = k1.clone();
    let k2 = forced_rhs(&axpy(u, 0.5 * dt, &k1), t + 0.5 * dt, kbar, forcing)?;
    acc.iter_mut().zip(&k2).for_each(|(a, k)| *a += 2.0 * k);
    let k3 = forced_rhs(&axpy(u, 0.5 * dt, &k2), t + 0.5 * dt, kbar, forcing)?;
    acc.iter_mut().zip(&k3).for_each(|(a, k)| *a += 2.0 * k);
    let k4 = forced_rhs(&axpy(u, dt, &k3), t + dt, kbar, forcing)?;
    acc.iter_mut().zip(&k4).for_each(|(a, k)| *a += k);
    let next = axpy(u, dt / 6.0, &acc);
    check_guard(&next, t + dt)?;
    Ok(next)
}

/// Frozen diffusion coefficient for the semi-implicit schemes: the nodal
/// maximum of `exp(-2u)`, which keeps the explicit remainder dissipative.
pub fn frozen_coefficient(u: &ScalarField) -> f64 {
    (-2.0 * u.min()).exp()
}

fn imex1_with(
    u: &ScalarField,
    t: f64,
    dt: f64,
    kbar: f64,
    m: f64,
    forcing: Option<&dyn Forcing>,
) -> Result<ScalarField> {
    let (mut rhs, lap) = rhs_parts(u, kbar).map_err(|e| with_time(e, t))?;
    if let Some(f) = forcing {
        let f = f.eval(t, u.surface());
        rhs.iter_mut().zip(f.values()).for_each(|(r, v)| *r += v);
    }
    let explicit: Vec<f64> = (0..u.len())
        .map(|i| u.values()[i] + dt * (rhs[i] - m * lap[i]))
        .collect();
    let values = u
        .surface()
        .apply_symbol(&explicit, |lambda| 1.0 / (1.0 - dt * m * lambda));
    let next = ScalarField::from_raw(u.surface(), values);
    check_guard(&next, t + dt)?;
    Ok(next)
}

/// One semi-implicit step: `(I - dt m Lap) u_next = u + dt (rhs(u) - m Lap u)`
/// with `m` from [`frozen_coefficient`].
pub fn step_imex1(
    u: &ScalarField,
    t: f64,
    dt: f64,
    kbar: f64,
    forcing: Option<&dyn Forcing>,
) -> Result<ScalarField> {
    imex1_with(u, t, dt, kbar, frozen_coefficient(u), forcing)
}

/// IMEX1 solutions with 1, 2, 3 and 4 substeps (coefficient frozen once at the
/// start) combined by polynomial extrapolation in the step size.
pub fn step_imex4(
    u: &ScalarField,
    t: f64,
    dt: f64,
    kbar: f64,
    forcing: Option<&dyn Forcing>,
) -> Result<ScalarField> {
    let m = frozen_coefficient(u);
    let mut acc = vec![0.0; u.len()];
    for (&n, &w) in EXTRAPOLATION_STEPS.iter().zip(&EXTRAPOLATION_WEIGHTS) {
        let h = dt / n as f64;
        let mut v = u.clone();
        for j in 0..n {
            v = imex1_with(&v, t + j as f64 * h, h, kbar, m, forcing)?;
        }
        acc.iter_mut()
            .zip(v.values())
            .for_each(|(a, b)| *a += w * b);
    }
    let next = ScalarField::from_raw(u.surface(), acc);
    check_guard(&next, t + dt)?;
    Ok(next)
}

/// Refuse RK4 macro steps that would need more substeps than this.
pub const MAX_RK4_SUBSTEPS: usize = 1_000_000;

/// Where the classical RK4 stability region meets the negative real axis.
pub const RK4_STABILITY_LIMIT: f64 = 2.785_293_563_405_282;

/// Largest stable RK4 step for the linearized diffusion:
/// `safety * RK4_STABILITY_LIMIT / (max exp(-2u) * |lambda_max|)`.
pub fn cfl_step(u: &ScalarField, safety: f64) -> f64 {
    safety * RK4_STABILITY_LIMIT / (frozen_coefficient(u) * u.surface().max_eigenvalue())
}

fn macro_step(u: &ScalarField, t: f64, h: f64, cfg: &FlowConfig) -> Result<ScalarField> {
    let kbar = u.surface().kbar();
    let forcing = cfg.forcing.as_deref();
    match cfg.integrator {
        Integrator::Rk4 => {
            // an exact discrete equilibrium is reproduced bit for bit by every
            // substep, so the substep loop can be skipped
            if forcing.is_none() && rhs_parts(u, kbar)?.0.iter().all(|&r| r == 0.0) {
                return Ok(u.clone());
            }
            let cap = cfl_step(u, cfg.cfl_safety);
            let substeps = (h / cap).ceil().max(1.0);
            if substeps > MAX_RK4_SUBSTEPS as f64 {
                return Err(Error::InvalidFlowConfig(format!(
                    "RK4 would need {substeps:.3e} substeps for one step at t = {t}; use an IMEX integrator"
                )));
            }
            let substeps = substeps as usize;
            let sub = h / substeps as f64;
            let mut v = u.clone();
            for j in 0..substeps {
                v = step_rk4(&v, t + j as f64 * sub, sub, kbar, forcing)?;
            }
            Ok(v)
        }
        Integrator::Imex1 => step_imex1(u, t, h, kbar, forcing),
        Integrator::Imex4 => step_imex4(u, t, h, kbar, forcing),
    }
}

fn stored_rhs(u: &ScalarField, t: f64, cfg: &FlowConfig) -> Result<ScalarField> {
    let rhs = forced_rhs(u, t, u.surface().kbar(), cfg.forcing.as_deref())?;
    Ok(ScalarField::from_raw(u.surface(), rhs))
}

/// Evolve `u0` from `t = 0` to `cfg.t_end`.
///
/// On a blow-up the error carries the trajectory up to the last good state.
pub fn evolve(u0: &ScalarField, cfg: &FlowConfig) -> Result<Trajectory> {
    let mut traj = Trajectory::new(Arc::clone(u0.surface()));
    let outcome = evolve_with(u0, cfg, |t, u, rhs| traj.push(t, u.clone(), rhs.clone()));
    match outcome {
        Ok(_) => Ok(traj),
        Err(Error::BlowUp { t, sup_norm, .. }) => {
            if traj.is_empty() {
                // the initial state itself tripped the guard
                traj.push(0.0, u0.clone(), ScalarField::zeros(u0.surface()));
            }
            Err(Error::BlowUp {
                t,
                sup_norm,
                partial: Some(Box::new(traj)),
            })
        }
        Err(e) => Err(e),
    }
}

/// Streaming form of [`evolve`]: `observe(t, u, du/dt)` is called at every
/// stored time instead of collecting states, and the final state is returned.
pub fn evolve_with<F>(u0: &ScalarField, cfg: &FlowConfig, mut observe: F) -> Result<ScalarField>
where
    F: FnMut(f64, &ScalarField, &ScalarField),
{
    cfg.validate()?;
    if cfg.require_unit_volume {
        let vol = crate::diagnostics::volume(u0);
        if (vol - 1.0).abs() > VOLUME_TOLERANCE {
            return Err(Error::NotNormalized(vol));
        }
    }
    let rhs = stored_rhs(u0, 0.0, cfg).map_err(|e| with_time(e, 0.0))?;
    observe(0.0, u0, &rhs);

    let steps = cfg.step_count();
    let mut u = u0.clone();
    for i in 0..steps {
        let t = i as f64 * cfg.dt;
        let last = i + 1 == steps;
        let mut h = if last { cfg.t_end - t } else { cfg.dt };
        if (h - cfg.dt).abs() <= 1e-12 * cfg.dt {
            h = cfg.dt;
        }
        let t_next = if last {
            cfg.t_end
        } else {
            (i + 1) as f64 * cfg.dt
        };
        u = macro_step(&u, t, h, cfg)?;
        if cfg.forcing.is_none() && u.surface().kbar() > 0.0 {
            u = normalize_volume(&u);
        }
        if last || (i + 1) % cfg.store_every == 0 {
            let rhs = stored_rhs(&u, t_next, cfg)?;
            observe(t_next, &u, &rhs);
        }
    }
    Ok(u)
}

/// Shift `u` by a constant so that `int exp(2u) dmu = 1`.
pub fn normalize_volume(u: &ScalarField) -> ScalarField {
    let max = u.max();
    let scaled = u.integrate_map(|v| (2.0 * (v - max)).exp());
    let shift = max + 0.5 * scaled.ln();
    u.map(|v| v - shift)
}
