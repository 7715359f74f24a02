//! Functionals of the one-sided comparison argument, evaluated on a pair of
//! numerical solutions `u` (reference) and `v` (candidate) with `w = u - v`,
//! plus sampled probes of the functional inequalities they rely on.
//!
//! Everything is built from the negative part `w_- = min(w, 0)` and the
//! truncation potential `F(x) = int_0^x s exp(-2s) ds`. Time integrals are
//! trapezoid sums over the common stored times, `L^inf` in time is a max over
//! stored times, and `|grad w_-|` is `|grad w|` on `{w < 0}` and zero elsewhere.

use std::fmt::Write as _;
use std::io::Write;

use crate::diagnostics::cumulative_trapezoid;
use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::geometry::io::fmt_f64;
use crate::geometry::ScalarField;
use crate::par;

/// Lower cap on `||grad f||^2` in the Trudinger–Moser ratio.
pub const TM_GRADIENT_FLOOR: f64 = 1e-12;

/// `min(f, 0)` pointwise.
pub fn negative_part(f: &ScalarField) -> ScalarField {
    f.map(|v| v.min(0.0))
}

/// `F(x) = (1 - exp(-2x) (2x + 1)) / 4`. Nonnegative, and at least `x^2/2`
/// for `x <= 0`.
pub fn truncation_potential(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // Taylor series avoids cancellation: x^2/2 - 2x^3/3 + x^4/2 - 4x^5/15
        let x2 = x * x;
        return x2 * (0.5 - x * (2.0 / 3.0 - x * (0.5 - x * 4.0 / 15.0)));
    }
    0.25 * (1.0 - (-2.0 * x).exp() * (2.0 * x + 1.0))
}

/// `int F(w_-) dmu`.
pub fn truncation_energy(w: &ScalarField) -> f64 {
    w.integrate_map(|v| truncation_potential(v.min(0.0)))
}

/// `||f||_4^4 / (||f||_2^2 ||f||_{H^1}^2)`, bounded by the Gagliardo–Nirenberg
/// constant of the surface.
pub fn gn_ratio(f: &ScalarField) -> Result<f64> {
    let l2sq = f.integrate_map(|v| v * v);
    if l2sq == 0.0 {
        return Err(Error::ZeroField);
    }
    let l4 = f.integrate_map(|v| v.powi(4));
    let h1sq = l2sq + f.dirichlet_energy();
    Ok(l4 / (l2sq * h1sq))
}

/// `log int exp(f - mean f) dmu / max(||grad f||^2, floor)`, bounded by the
/// Trudinger–Moser exponent.
pub fn tm_ratio(f: &ScalarField) -> Result<f64> {
    if f.sup_norm() == 0.0 {
        return Err(Error::ZeroField);
    }
    let mean = f.mean();
    let centred = f.map(|v| v - mean);
    // Jensen: the log moment is >= 0; treat roundoff-level values as zero so
    // the gradient floor does not amplify them
    let log_moment = log_integral_exp(&centred, 1.0);
    let log_moment = if log_moment.abs() < 1e-13 {
        0.0
    } else {
        log_moment
    };
    Ok(log_moment / f.dirichlet_energy().max(TM_GRADIENT_FLOOR))
}

/// `log int exp(p f) dmu`, evaluated without overflow.
fn log_integral_exp(f: &ScalarField, p: f64) -> f64 {
    let top = p * f.max();
    top + f.integrate_map(|v| (p * v - top).exp()).ln()
}

/// `(int exp(p f) dmu)^(1/p)`.
pub fn exp_moment(f: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    let value = (log_integral_exp(f, p) / p).exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow)
    }
}

/// `||f||^2_{L^4 L^4} / (||f||^2_{L^inf L^2} + ||grad f||^2_{L^2 L^2})` over the
/// stored states of a trajectory, the space-time Sobolev ratio.
pub fn space_time_sobolev_ratio(traj: &Trajectory) -> Result<f64> {
    let slices: Vec<(f64, f64, f64)> = par::map(traj.states(), |f| {
        (
            f.integrate_map(|v| v.powi(4)),
            f.integrate_map(|v| v * v),
            f.dirichlet_energy(),
        )
    });
    let l4: Vec<f64> = slices.iter().map(|s| s.0).collect();
    let grad: Vec<f64> = slices.iter().map(|s| s.2).collect();
    let sup_l2 = slices.iter().fold(0.0f64, |m, s| m.max(s.1));
    if sup_l2 == 0.0 {
        return Err(Error::ZeroField);
    }
    let times = traj.times();
    let l4_total = *cumulative_trapezoid(times, &l4).last().expect("nonempty");
    let grad_total = *cumulative_trapezoid(times, &grad).last().expect("nonempty");
    Ok(l4_total.sqrt() / (sup_l2 + grad_total))
}

/// Per-time integrands of one stored state of the pair.
#[derive(Debug, Clone, Copy, Default)]
struct Slice {
    gradient_term: f64,
    curvature_term: f64,
    evolution_term: f64,
    /// Signed counterparts entering the exact identity.
    cross_signed: f64,
    curvature_signed: f64,
    evolution_signed: f64,
    psi: f64,
    grad_neg_weighted: f64,
    grad_neg: f64,
    grad_u_quartic: f64,
    exp_quartic: f64,
    exp_octic: f64,
    dudt_l4_sq: f64,
    weight_min: f64,
    neg_sup: f64,
    diff_sup: f64,
}

fn slice(u: &ScalarField, v: &ScalarField, dudt: &ScalarField, kbar: f64) -> Slice {
    let w = u.sub(v).expect("pair shares the surface");
    let grad_u = u.grad_norm_sq();
    let grad_w = w.grad_norm_sq();
    let grad_uw = u.grad_dot(&w).expect("pair shares the surface");
    let weights = u.surface().weights();
    let mut s = Slice {
        weight_min: f64::INFINITY,
        ..Slice::default()
    };
    let mut dudt4 = 0.0;
    for i in 0..w.len() {
        let q = weights[i];
        let wi = w.values()[i];
        let wm = wi.min(0.0);
        let ui = u.values()[i];
        let e_u = (-2.0 * ui).exp();
        let e_w = (-2.0 * wm).exp();
        let ut = dudt.values()[i];
        let neg = if wi < 0.0 { 1.0 } else { 0.0 };
        s.gradient_term += q * 2.0 * e_u * grad_u.values()[i] * wm * wm;
        s.curvature_term += q * kbar.abs() * (wm * (1.0 - e_w)).abs();
        s.evolution_term += q * (wm * (e_w - 1.0) * ut).abs();
        s.cross_signed += q * 2.0 * e_u * neg * grad_uw.values()[i] * wm;
        s.curvature_signed += q * kbar * wm * (1.0 - e_w);
        s.evolution_signed += q * wm * (e_w - 1.0) * ut;
        s.psi += q * truncation_potential(wm);
        s.grad_neg_weighted += q * e_u * neg * grad_w.values()[i];
        s.grad_neg += q * neg * grad_w.values()[i];
        s.grad_u_quartic += q * grad_u.values()[i].powi(2);
        s.exp_quartic += q * (4.0 * wm.abs()).exp();
        s.exp_octic += q * (8.0 * wm.abs()).exp();
        dudt4 += q * ut.powi(4);
        s.weight_min = s.weight_min.min(e_u);
        s.neg_sup = s.neg_sup.max(wm.abs());
        s.diff_sup = s.diff_sup.max(wi.abs());
    }
    s.dudt_l4_sq = dudt4.sqrt();
    s
}

/// The three integrals bounding the truncation energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonIntegrals {
    /// `2 int int exp(-2u) |grad u|^2 |w_-|^2`.
    pub gradient: f64,
    /// `|kbar| int int |w_- (1 - exp(-2 w_-))|`.
    pub curvature: f64,
    /// `int int |w_- (exp(-2 w_-) - 1) du/dt|`.
    pub evolution: f64,
}

impl ComparisonIntegrals {
    pub fn sum(&self) -> f64 {
        self.gradient + self.curvature + self.evolution
    }
}

/// Smallness factors multiplying `||w_-||^2_{L^inf L^2} + ||grad w_-||^2_{L^2 L^2}`
/// in the bounds on [`ComparisonIntegrals`]; each vanishes as `T -> 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessFactors {
    /// `C (int int |grad u|^4)^(1/2)`.
    pub gradient: f64,
    /// `C (int int exp(4 |w_-|))^(1/2)`.
    pub curvature: f64,
    /// `C ||exp(|w_-|)||^2_{L^inf L^8} ||du/dt||_{L^2 L^4}`.
    pub evolution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub horizon: f64,
    pub sobolev_constant: f64,
    /// `max_t int F(w_-(t))`.
    pub psi_max: f64,
    /// `||grad w_-||^2_{L^2 L^2}`.
    pub grad_neg_l2sq: f64,
    /// `int int exp(-2u) |grad w_-|^2`.
    pub grad_neg_weighted: f64,
    pub integrals: ComparisonIntegrals,
    pub factors: SmallnessFactors,
    /// Uniform lower bound of `exp(-2u)` on `[0, T]`.
    pub weight_floor: f64,
    /// `2 / min(1, weight_floor)`.
    pub coercivity: f64,
    /// Contraction factor `2 coercivity (factors.gradient + |kbar| factors.curvature + factors.evolution)`.
    pub delta: f64,
    pub contraction_satisfied: bool,
    /// `max_t ||w_-(t)||_inf` and `max_t ||w(t)||_inf`.
    pub neg_sup: f64,
    pub diff_sup: f64,
    /// Largest positive defect of the discrete energy identity for `F(w_-)`
    /// over `[0, T]`: the amount by which the numerical pair fails to satisfy
    /// it exactly.
    pub identity_defect: f64,
    /// `psi_max + grad_neg_weighted / 2`, and its bound `2 (A + B + C) + 2 defect`.
    pub chain_lhs: f64,
    pub chain_rhs: f64,
}

impl EstimateReport {
    pub fn chain_holds(&self) -> bool {
        self.chain_lhs <= self.chain_rhs * (1.0 + 1e-12) + 1e-15
    }

    /// `max_t psi <= (1/2) s^2 exp(2s)` with `s = max_t ||w_-||_inf`, which
    /// follows from `F(x) <= x^2 exp(2|x|) / 2`.
    pub fn psi_bound_holds(&self) -> bool {
        let s = self.neg_sup;
        self.psi_max <= 0.5 * s * s * (2.0 * s).exp() * (1.0 + 1e-12)
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("horizon", fmt_f64(self.horizon)),
            ("sobolev_constant", fmt_f64(self.sobolev_constant)),
            ("psi_max", fmt_f64(self.psi_max)),
            ("grad_neg_l2sq", fmt_f64(self.grad_neg_l2sq)),
            ("grad_neg_weighted", fmt_f64(self.grad_neg_weighted)),
            ("integral_gradient", fmt_f64(self.integrals.gradient)),
            ("integral_curvature", fmt_f64(self.integrals.curvature)),
            ("integral_evolution", fmt_f64(self.integrals.evolution)),
            ("delta_gradient", fmt_f64(self.factors.gradient)),
            ("delta_curvature", fmt_f64(self.factors.curvature)),
            ("delta_evolution", fmt_f64(self.factors.evolution)),
            ("weight_floor", fmt_f64(self.weight_floor)),
            ("coercivity", fmt_f64(self.coercivity)),
            ("delta", fmt_f64(self.delta)),
            (
                "contraction_satisfied",
                self.contraction_satisfied.to_string(),
            ),
            ("neg_sup", fmt_f64(self.neg_sup)),
            ("diff_sup", fmt_f64(self.diff_sup)),
            ("identity_defect", fmt_f64(self.identity_defect)),
            ("chain_lhs", fmt_f64(self.chain_lhs)),
            ("chain_rhs", fmt_f64(self.chain_rhs)),
        ]
    }

    /// Flat `key = value` text.
    pub fn to_key_value_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.key_values() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn csv_header() -> String {
        let cols: Vec<&str> = Self::placeholder()
            .key_values()
            .into_iter()
            .map(|(k, _)| k)
            .collect();
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let cols: Vec<String> = self.key_values().into_iter().map(|(_, v)| v).collect();
        cols.join(",")
    }

    /// Append a row to a summary CSV, writing the header first if `with_header`.
    pub fn write_csv_row<W: Write>(&self, mut out: W, with_header: bool) -> Result<()> {
        if with_header {
            writeln!(out, "{}", Self::csv_header())?;
        }
        writeln!(out, "{}", self.csv_row())?;
        Ok(())
    }

    fn placeholder() -> Self {
        let zero3 = ComparisonIntegrals {
            gradient: 0.0,
            curvature: 0.0,
            evolution: 0.0,
        };
        Self {
            horizon: 0.0,
            sobolev_constant: 0.0,
            psi_max: 0.0,
            grad_neg_l2sq: 0.0,
            grad_neg_weighted: 0.0,
            integrals: zero3,
            factors: SmallnessFactors {
                gradient: 0.0,
                curvature: 0.0,
                evolution: 0.0,
            },
            weight_floor: 0.0,
            coercivity: 0.0,
            delta: 0.0,
            contraction_satisfied: false,
            neg_sup: 0.0,
            diff_sup: 0.0,
            identity_defect: 0.0,
            chain_lhs: 0.0,
            chain_rhs: 0.0,
        }
    }
}

/// Per-time integrands of a trajectory pair, computed once and reused for
/// every horizon `T`.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    times: Vec<f64>,
    kbar: f64,
    slices: Vec<Slice>,
}

impl PairAnalysis {
    /// Requires both trajectories on the same surface with matching stored
    /// times; the longer one is cut to the common prefix.
    pub fn new(u: &Trajectory, v: &Trajectory) -> Result<Self> {
        if !u.surface().same_shape(v.surface()) {
            return Err(Error::GridMismatch(
                "trajectories live on different surfaces".into(),
            ));
        }
        let n = u.len().min(v.len());
        for k in 0..n {
            let (a, b) = (u.times()[k], v.times()[k]);
            if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(Error::GridMismatch(format!(
                    "stored time {k} differs: {a} vs {b}"
                )));
            }
        }
        let kbar = u.surface().kbar();
        let slices = par::map_range(n, |k| {
            slice(&u.states()[k], &v.states()[k], &u.rhs_values()[k], kbar)
        });
        Ok(Self {
            times: u.times()[..n].to_vec(),
            kbar,
            slices,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn horizon_index(&self, horizon: f64) -> Result<usize> {
        let tol = 1e-9 * horizon.abs().max(1.0);
        self.times
            .iter()
            .position(|&t| (t - horizon).abs() <= tol)
            .ok_or(Error::HorizonNotStored(horizon))
    }

    fn cumulative(&self, end: usize, f: impl Fn(&Slice) -> f64) -> Vec<f64> {
        let samples: Vec<f64> = self.slices[..=end].iter().map(f).collect();
        cumulative_trapezoid(&self.times[..=end], &samples)
    }

    fn total(&self, end: usize, f: impl Fn(&Slice) -> f64) -> f64 {
        *self.cumulative(end, f).last().expect("nonempty")
    }

    pub fn integrals(&self, horizon: f64) -> Result<ComparisonIntegrals> {
        let k = self.horizon_index(horizon)?;
        Ok(ComparisonIntegrals {
            gradient: self.total(k, |s| s.gradient_term),
            curvature: self.total(k, |s| s.curvature_term),
            evolution: self.total(k, |s| s.evolution_term),
        })
    }

    pub fn factors(&self, horizon: f64, sobolev_constant: f64) -> Result<SmallnessFactors> {
        let k = self.horizon_index(horizon)?;
        let c = sobolev_constant;
        let exp_l8_sq = self.slices[..=k]
            .iter()
            .map(|s| s.exp_octic.powf(0.25))
            .fold(0.0f64, f64::max);
        Ok(SmallnessFactors {
            gradient: c * self.total(k, |s| s.grad_u_quartic).sqrt(),
            curvature: c * self.total(k, |s| s.exp_quartic).sqrt(),
            evolution: c * exp_l8_sq * self.total(k, |s| s.dudt_l4_sq).sqrt(),
        })
    }

    pub fn report(&self, horizon: f64, sobolev_constant: f64) -> Result<EstimateReport> {
        let k = self.horizon_index(horizon)?;
        let integrals = self.integrals(horizon)?;
        let factors = self.factors(horizon, sobolev_constant)?;
        let window = &self.slices[..=k];
        let weight_floor = window
            .iter()
            .map(|s| s.weight_min)
            .fold(f64::INFINITY, f64::min);
        let coercivity = 2.0 / weight_floor.min(1.0);
        let delta = 2.0
            * coercivity
            * (factors.gradient + self.kbar.abs() * factors.curvature + factors.evolution);

        // Discrete energy identity for F(w_-):
        // psi(t) - psi(0) + G(t) = cross(t) + curvature(t) + evolution(t) + defect(t).
        let grad_w = self.cumulative(k, |s| s.grad_neg_weighted);
        let cross = self.cumulative(k, |s| s.cross_signed);
        let curv = self.cumulative(k, |s| s.curvature_signed);
        let evol = self.cumulative(k, |s| s.evolution_signed);
        let psi0 = window[0].psi;
        let identity_defect = (0..=k)
            .map(|j| window[j].psi - psi0 + grad_w[j] - cross[j] - curv[j] - evol[j])
            .fold(0.0f64, f64::max);
        let psi_max = window.iter().map(|s| s.psi).fold(0.0f64, f64::max);
        let grad_neg_weighted = grad_w[k];
        Ok(EstimateReport {
            horizon,
            sobolev_constant,
            psi_max,
            grad_neg_l2sq: self.total(k, |s| s.grad_neg),
            grad_neg_weighted,
            integrals,
            factors,
            weight_floor,
            coercivity,
            delta,
            contraction_satisfied: delta < 1.0,
            neg_sup: window.iter().map(|s| s.neg_sup).fold(0.0, f64::max),
            diff_sup: window.iter().map(|s| s.diff_sup).fold(0.0, f64::max),
            identity_defect,
            chain_lhs: psi_max - psi0 + 0.5 * grad_neg_weighted,
            chain_rhs: 2.0 * (integrals.sum() + identity_defect),
        })
    }
}

pub fn comparison_integrals(
    u: &Trajectory,
    v: &Trajectory,
    horizon: f64,
) -> Result<ComparisonIntegrals> {
    PairAnalysis::new(u, v)?.integrals(horizon)
}

pub fn smallness_factors(
    u: &Trajectory,
    v: &Trajectory,
    horizon: f64,
    sobolev_constant: f64,
) -> Result<SmallnessFactors> {
    PairAnalysis::new(u, v)?.factors(horizon, sobolev_constant)
}

pub fn contraction_report(
    u: &Trajectory,
    v: &Trajectory,
    horizon: f64,
    sobolev_constant: f64,
) -> Result<EstimateReport> {
    PairAnalysis::new(u, v)?.report(horizon, sobolev_constant)
}
