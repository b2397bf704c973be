//! Convolution-equivalent asymptotics for models with heavy upward jumps.
//!
//! All ladder quantities use the spectrally positive closed forms: the
//! descending ladder height is pure drift, so the dual renewal measure is
//! `e^{-Φ̂(0)y} dy` and `κ(q, 0) = q / Φ̂(q)`, `κ(0, −α) = −ψ(α)/(Φ̂(0) + α)`,
//! with `Φ̂` the right inverse of `θ ↦ ψ(−θ)`.
//!
//! The first-passage asymptote `P(τ_x⁺ < e_q) ≃ κ(q,0)/(κ(q,0)+κ(0,−α))² Π̄_H(x)`
//! gives, for the future-drawup functionals with an infinite lookahead,
//!
//! * `P(overline U*_t > x) ≃ (c₁(t) + K₀ E[e^{α X̄_t}]) Π̄_H(x)`,
//! * `P(underline U*_t > x) ≃ K₀ E[e^{α X̲_t}] Π̄_H(x)`,
//!
//! where `K₀ = κ(0,0)/(κ(0,0)+κ(0,−α))²` and `c₁` has Laplace transform
//! `(Φ̂(q) + α)/(q + κ(0,−α) Φ̂(q))²`. The renewal-form constants
//! (`E[e^{αX̄_t}] + ∫ E[e^{αX̲_{t−s}}]⁻¹ μ(ds)` and `E[e^{−αX̲_t}]`)
//! are computed alongside for comparison.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cramer::LadderExponent;
use crate::error::{Error, Result};
use crate::model::{JumpLaw, LevyModel, SignTag};
use crate::numeric::laplace::{laplace_invert_tol, RealTransform, DEFAULT_TERMS};
use crate::numeric::quad::{integrate, QuadOpts};
use crate::sim::functionals::FunctionalKind;
use crate::sim::grid::PathGrid;
use crate::sim::mc::{run_paths, McEstimate, SimConfig};
use crate::sim::path::simulate_path;

/// Relative change between the last two diagnostic levels accepted as "stable".
pub const DIAGNOSTIC_TOL: f64 = 0.05;

/// Tolerance for inverting the ladder transforms.
const INVERSION_TOL: f64 = 1e-5;

/// Tail guard below which diagnostics report underflow.
const TAIL_FLOOR: f64 = 1e-280;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tail `V̄(u) = V(u, ∞)` of a measure on `(0, ∞)`.
#[derive(Clone)]
pub struct TailMeasure {
    tail: RealFn,
    density: Option<RealFn>,
    pub alpha: f64,
}

impl std::fmt::Debug for TailMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TailMeasure").field("alpha", &self.alpha).finish_non_exhaustive()
    }
}

impl TailMeasure {
    pub fn new(alpha: f64, tail: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { tail: Arc::new(tail), density: None, alpha }
    }

    pub fn with_density(mut self, density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.density = Some(Arc::new(density));
        self
    }

    /// Lévy tail of one jump component.
    pub fn from_component(intensity: f64, law: JumpLaw, alpha: f64) -> Self {
        Self::new(alpha, move |u| intensity * law.survival(u)).with_density(move |x| intensity * law.density(x))
    }

    pub fn tail(&self, u: f64) -> f64 {
        (self.tail)(u)
    }

    /// Density `−V̄'(u)`; central differences when none was supplied.
    pub fn density(&self, u: f64) -> f64 {
        match &self.density {
            Some(d) => d(u),
            None => {
                let h = 1e-5 * (1.0 + u.abs());
                let lo = (u - h).max(0.0);
                (self.tail(lo) - self.tail(u + h)) / (u + h - lo)
            }
        }
    }

    /// `V̄^{*2}(u) = V̄(0)V̄(u) + ∫_0^u V̄(u − y) V(dy)` for a finite measure.
    pub fn convolution_tail(&self, u: f64) -> Result<f64> {
        let opts = QuadOpts::with_tol(1e-300, 1e-10);
        let f = |y: f64| self.tail(u - y) * self.density(y);
        let mid = 0.5 * u;
        Ok(self.tail(0.0) * self.tail(u) + integrate(f, 0.0, mid, opts)? + integrate(f, mid, u, opts)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRatioRow {
    pub y: f64,
    /// `V̄(u − y)/V̄(u)` at each diagnostic level.
    pub ratios: Vec<f64>,
    /// `e^{αy}`
    pub target: f64,
    pub stabilized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub alpha: f64,
    pub levels: Vec<f64>,
    pub shift_ratios: Vec<ShiftRatioRow>,
    /// `V̄^{*2}(u)/V̄(u)` at each level.
    pub convolution_ratios: Vec<f64>,
    /// Half the last convolution ratio.
    pub m0_estimate: f64,
    pub convolution_stabilized: bool,
    pub tolerance: f64,
}

fn stable(values: &[f64]) -> bool {
    let n = values.len();
    n >= 2 && (values[n - 1] - values[n - 2]).abs() <= DIAGNOSTIC_TOL * values[n - 1].abs()
}

/// Numerical diagnostic of class `S^(α)` membership on levels `u_max/8 … u_max`.
pub fn class_diagnostic(tm: &TailMeasure, y_grid: &[f64], u_max: f64) -> Result<ClassReport> {
    if !(u_max > 0.0) {
        return Err(Error::DomainMsg("class diagnostic needs u_max > 0".into()));
    }
    let y_top = y_grid.iter().fold(0.0f64, |m, y| m.max(-y));
    let far = tm.tail(u_max + y_top);
    if !(far >= TAIL_FLOOR) {
        return Err(Error::Underflow { u: u_max + y_top });
    }
    let levels: Vec<f64> = [0.125, 0.25, 0.5, 1.0].iter().map(|f| f * u_max).collect();
    let shift_ratios = y_grid
        .iter()
        .map(|&y| {
            let ratios: Vec<f64> = levels.iter().map(|&u| tm.tail(u - y) / tm.tail(u)).collect();
            ShiftRatioRow { y, stabilized: stable(&ratios), ratios, target: (tm.alpha * y).exp() }
        })
        .collect();
    let convolution_ratios =
        levels.iter().map(|&u| Ok(tm.convolution_tail(u)? / tm.tail(u))).collect::<Result<Vec<f64>>>()?;
    Ok(ClassReport {
        alpha: tm.alpha,
        m0_estimate: 0.5 * convolution_ratios.last().copied().unwrap_or(f64::NAN),
        convolution_stabilized: stable(&convolution_ratios),
        levels,
        shift_ratios,
        convolution_ratios,
        tolerance: DIAGNOSTIC_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderSource {
    VigonQuadrature,
    /// `V̄(u)/κ̂(0, α)`; asymptotic only.
    SpectrallyPositiveShortcut,
}

/// Tail `Π̄_H` of the ascending ladder-height measure.
#[derive(Debug, Clone, Copy)]
pub struct LadderTail {
    model: LevyModel,
    source: LadderSource,
    alpha: f64,
    phi_hat0: f64,
}

impl LadderTail {
    pub fn new(model: &LevyModel, alpha: f64, source: LadderSource) -> Result<Self> {
        if model.sign_tag() != SignTag::SpectrallyPositive {
            return Err(Error::UnsupportedModel("ladder tail needs upward jumps only".into()));
        }
        Ok(Self { model: *model, source, alpha, phi_hat0: model.dual().phi(0.0)? })
    }

    pub fn source(&self) -> LadderSource {
        self.source
    }

    pub fn eval(&self, u: f64) -> f64 {
        let Some(c) = self.model.jumps_up else { return 0.0 };
        let u = u.max(0.0);
        match self.source {
            LadderSource::VigonQuadrature => {
                // ∫_0^∞ V̄(u + y) e^{-φy} dy = λ ∫_u^∞ f(x) (1 − e^{-φ(x−u)})/φ dx
                let phi = self.phi_hat0;
                let h = move |w: f64| if phi > 0.0 { -(-phi * w).exp_m1() / phi } else { w };
                c.intensity * c.law.tail_integral(u, h)
            }
            LadderSource::SpectrallyPositiveShortcut => c.tail(u) / (self.phi_hat0 + self.alpha),
        }
    }
}

/// `Π̄_H(u)` from the Vigon identity.
pub fn vigon_ladder_tail(model: &LevyModel, u: f64) -> Result<f64> {
    Ok(LadderTail::new(model, 0.0, LadderSource::VigonQuadrature)?.eval(u))
}

/// Shortcut-to-quadrature ratios of `Π̄_H` on increasing levels.
pub fn shortcut_trend(model: &LevyModel, alpha: f64, levels: &[f64]) -> Result<Vec<(f64, f64)>> {
    let exact = LadderTail::new(model, alpha, LadderSource::VigonQuadrature)?;
    let short = LadderTail::new(model, alpha, LadderSource::SpectrallyPositiveShortcut)?;
    Ok(levels.iter().map(|&u| (u, short.eval(u) / exact.eval(u))).collect())
}

/// Ladder quantities at `q = 0` shared by the asymptote constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeavyConditions {
    pub alpha: f64,
    pub psi_alpha: f64,
    pub phi_hat0: f64,
    /// `κ(0, 0)`
    pub kappa00: f64,
    /// `κ(0, −α)`
    pub kappa0_alpha: f64,
}

impl HeavyConditions {
    /// `K₀ = κ(0,0)/(κ(0,0)+κ(0,−α))²`.
    pub fn k0(&self) -> f64 {
        let s = self.kappa00 + self.kappa0_alpha;
        self.kappa00 / (s * s)
    }
}

/// Checks `E[X_1] < 0`, (Con2b) and (Con2) for a spectrally positive model.
pub fn check_conditions(model: &LevyModel, alpha: f64) -> Result<HeavyConditions> {
    if model.sign_tag() != SignTag::SpectrallyPositive {
        return Err(Error::UnsupportedModel("heavy-tail constants need upward jumps only".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::DomainMsg(format!("alpha = {alpha} must be positive")));
    }
    if !(model.mean() < 0.0) {
        return Err(Error::ConditionViolated("E[X_1] < 0".into()));
    }
    let psi_alpha = model.psi(alpha).map_err(|_| Error::ConditionViolated("(Con2b): psi(alpha) is infinite".into()))?;
    if !(psi_alpha < 0.0) {
        return Err(Error::ConditionViolated(format!("(Con2b): psi(alpha) = {psi_alpha} is not negative")));
    }
    let phi_hat0 = model.dual().phi(0.0)?;
    let kappa00 = LadderExponent::new(model)?.kappa(0.0, 0.0)?;
    let kappa0_alpha = -psi_alpha / (phi_hat0 + alpha);
    if !(kappa00 + kappa0_alpha > 0.0) {
        return Err(Error::ConditionViolated("(Con2): kappa(0,0) + kappa(0,-alpha) > 0".into()));
    }
    Ok(HeavyConditions { alpha, psi_alpha, phi_hat0, kappa00, kappa0_alpha })
}

/// (Con1) for the built-in exemplar: upward jumps from the tempered-Pareto law
/// with the same `α`, whose Lévy measure lies in `S^(α)`.
pub fn check_membership(model: &LevyModel, alpha: f64) -> Result<()> {
    match model.jumps_up.map(|c| c.law) {
        Some(JumpLaw::TemperedPareto { alpha: a }) if (a - alpha).abs() <= 1e-12 * alpha => Ok(()),
        _ => Err(Error::ConditionViolated(format!(
            "(Con1): upward jumps must follow the tempered-Pareto law with alpha = {alpha}"
        ))),
    }
}

/// `q (Lμ)(q)` in three algebraic forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuForms {
    /// `κ(q,0)/(κ(q,0)+κ(0,−α))²` with `κ` from the ladder exponent.
    pub ladder: f64,
    /// `qΦ̂(q)/(q − Φ̂(q)ψ(α)/(Φ̂(0)+α))²`.
    pub closed: f64,
    /// The same with `Φ̂(q)²` in the denominator; differs from the other two.
    pub squared: f64,
}

pub fn mu_transform_forms(model: &LevyModel, alpha: f64, q: f64) -> Result<MuForms> {
    let c = check_conditions(model, alpha)?;
    if !(q > 0.0) {
        return Err(Error::DomainMsg(format!("q = {q} must be positive")));
    }
    let kappa_q = LadderExponent::new(model)?.kappa(q, 0.0)?;
    let ladder = kappa_q / (kappa_q + c.kappa0_alpha).powi(2);
    let ph = model.dual().phi(q)?;
    let r = c.psi_alpha / (c.phi_hat0 + alpha);
    let closed = q * ph / (q - ph * r).powi(2);
    let squared = q * ph / (q - ph * ph * r).powi(2);
    Ok(MuForms { ladder, closed, squared })
}

/// `(Lμ)(q) = q⁻¹ κ(q,0)/(κ(q,0)+κ(0,−α))²`.
pub fn mu_transform(model: &LevyModel, alpha: f64, q: f64) -> Result<f64> {
    Ok(mu_transform_forms(model, alpha, q)?.ladder / q)
}

/// `μ[0, t]` by inverting `(Lμ)(q)/q`; signed in general, so no rearrangement.
pub fn mu_distribution(model: &LevyModel, alpha: f64, t: f64) -> Result<f64> {
    let c = check_conditions(model, alpha)?;
    let dual = model.dual();
    let f = RealTransform(|q: f64| {
        dual.phi(q).map_or(f64::NAN, |ph| {
            let kq = q / ph;
            kq / (kq + c.kappa0_alpha).powi(2) / (q * q)
        })
    });
    laplace_invert_tol(&f, t, DEFAULT_TERMS, INVERSION_TOL)
}

/// Jump of `μ` at `0⁺`, read off `(Lμ)(q)` at large `q`.
pub fn mu_atom(model: &LevyModel, alpha: f64) -> Result<f64> {
    mu_transform(model, alpha, 1e10)
}

/// `c₁(t) = lim P(overline U_t > x)/Π̄_H(x)`, the running max-drawup part of the
/// overline constant.
pub fn max_drawup_constant(model: &LevyModel, alpha: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let c = check_conditions(model, alpha)?;
    let dual = model.dual();
    let f = RealTransform(|q: f64| dual.phi(q).map_or(f64::NAN, |ph| (ph + alpha) / (q + c.kappa0_alpha * ph).powi(2)));
    laplace_invert_tol(&f, t, DEFAULT_TERMS, INVERSION_TOL)
}

/// Per-path `(sup moment, e^{αX̲_t}, e^{−αX̲_t}, e^{αX̲} on the cell grid)`.
type MomentRow = (f64, f64, f64, Vec<f64>);

/// Monte Carlo extrema moments at `t` and the grid `r_j = jt/m` of `E[e^{αX̲_r}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaMoments {
    /// `E[e^{αX̄_t}]` via `e^{tψ(α)} + α ∫_0^t e^{(t−s)ψ(α)} X_s⁻ s⁻¹ ds` per path.
    pub sup: McEstimate,
    /// `E[e^{αX̲_t}]`
    pub inf: McEstimate,
    /// `E[e^{−αX̲_t}]`
    pub neg_inf: McEstimate,
    /// `E[e^{αX̲_{r_j}}]`, `j = 0..=m`.
    pub inf_grid: Vec<f64>,
}

/// Grid nodes per μ cell.
const NODES_PER_CELL: usize = 32;

pub fn extrema_moments(
    model: &LevyModel,
    alpha: f64,
    t: f64,
    cells: usize,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<ExtremaMoments> {
    model.require_one_sided("extrema moments")?;
    if !model.sign_tag().has_no_negative_jumps() {
        return Err(Error::UnsupportedModel("extrema moments need no downward jumps".into()));
    }
    let psi_a = model.psi(alpha)?;
    let steps = cells * NODES_PER_CELL;
    let h = t / steps as f64;
    let grid = PathGrid::new(t, 0.0, h)?.with_bridge(cfg.bridge);
    let rows = run_paths(n, seed, cfg.threads, |_, rng| {
        let path = simulate_path(model, &grid, rng);
        let mut prefix = Vec::with_capacity(path.points.len());
        let mut m = 0.0f64;
        for p in &path.points {
            m = m.min(p.value);
            prefix.push(m);
        }
        let at = |k: usize| -> Result<(f64, f64)> {
            let s = (k as f64 * h).min(t);
            let i = path.node_index(s).ok_or(Error::Horizon { need: s, have: path.end })?;
            Ok((path.points[i].value, prefix[i]))
        };
        let g = |k: usize| -> Result<f64> {
            let s = k as f64 * h;
            Ok(((t - s) * psi_a).exp() * (-at(k)?.0).max(0.0) / s)
        };
        // first cell as ∫_0^h √(s/h) g(h) h/s ds = 2 h g(h); trapezoid afterwards
        let mut integral = 2.0 * h * g(1)?;
        let mut prev = g(1)?;
        for k in 2..=steps {
            let cur = g(k)?;
            integral += 0.5 * h * (prev + cur);
            prev = cur;
        }
        let mins: Vec<f64> =
            (0..=cells).map(|j| at(j * NODES_PER_CELL).map(|v| (alpha * v.1).exp())).collect::<Result<_>>()?;
        let low = at(steps)?.1;
        Ok(((t * psi_a).exp() + alpha * integral, (alpha * low).exp(), (-alpha * low).exp(), mins))
    })?;
    let col = |f: &dyn Fn(&MomentRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let est = |v: Vec<f64>| McEstimate::from_values(&v, seed, h, cfg.bridge);
    let inf_grid =
        (0..=cells).map(|j| crate::numeric::stats::compensated_sum(rows.iter().map(|r| r.3[j])) / n as f64).collect();
    Ok(ExtremaMoments { sup: est(col(&|r| r.0)), inf: est(col(&|r| r.1)), neg_inf: est(col(&|r| r.2)), inf_grid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyConstants {
    pub t: f64,
    pub alpha: f64,
    /// `c₁(t) + K₀ E[e^{αX̄_t}]`
    pub plus: f64,
    /// `K₀ E[e^{αX̲_t}]`
    pub minus: f64,
    /// `E[e^{αX̄_t}] + ∫_0^t E[e^{αX̲_{t−s}}]⁻¹ μ(ds)`
    pub plus_renewal: f64,
    /// `E[e^{−αX̲_t}]`
    pub minus_reflected: f64,
    pub k0: f64,
    pub max_drawup_term: f64,
    pub mu_atom: f64,
    pub conditions: HeavyConditions,
    pub moments: ExtremaMoments,
}

/// Constants of the heavy-tailed asymptotes at horizon `t`.
pub fn heavy_constants(
    model: &LevyModel,
    alpha: f64,
    t: f64,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<HeavyConstants> {
    let conditions = check_conditions(model, alpha)?;
    check_membership(model, alpha)?;
    if !(t >= 0.0) {
        return Err(Error::DomainMsg(format!("t = {t} must be nonnegative")));
    }
    let k0 = conditions.k0();
    let atom = mu_atom(model, alpha)?;
    if t == 0.0 {
        let one = McEstimate::from_values(&[1.0, 1.0], seed, 0.0, cfg.bridge);
        let moments = ExtremaMoments { sup: one.clone(), inf: one.clone(), neg_inf: one, inf_grid: vec![1.0] };
        return Ok(HeavyConstants {
            t,
            alpha,
            plus: k0,
            minus: k0,
            plus_renewal: 1.0 + atom,
            minus_reflected: 1.0,
            k0,
            max_drawup_term: 0.0,
            mu_atom: atom,
            conditions,
            moments,
        });
    }
    let cells = 64;
    let moments = extrema_moments(model, alpha, t, cells, n, seed, cfg)?;
    let c1 = max_drawup_constant(model, alpha, t)?;
    // Stieltjes sum of E[e^{αX̲_{t−s}}]⁻¹ against μ on the cell grid
    let mut f_prev = atom;
    let mut stieltjes = atom / moments.inf_grid[cells];
    for j in 1..=cells {
        let s = t * j as f64 / cells as f64;
        let f = mu_distribution(model, alpha, s)?;
        let w = 0.5 * (1.0 / moments.inf_grid[cells - j] + 1.0 / moments.inf_grid[cells - j + 1]);
        stieltjes += w * (f - f_prev);
        f_prev = f;
    }
    Ok(HeavyConstants {
        t,
        alpha,
        plus: c1 + k0 * moments.sup.mean,
        minus: k0 * moments.inf.mean,
        plus_renewal: moments.sup.mean + stieltjes,
        minus_reflected: moments.neg_inf.mean,
        k0,
        max_drawup_term: c1,
        mu_atom: atom,
        conditions,
        moments,
    })
}

/// `const · Π̄_H(x)` for `overline U*_t` or `underline U*_t` (infinite lookahead).
pub fn heavy_tail_approx(model: &LevyModel, kind: FunctionalKind, constants: &HeavyConstants, x: f64) -> Result<f64> {
    let pi_h = LadderTail::new(model, constants.alpha, LadderSource::VigonQuadrature)?.eval(x);
    match kind {
        FunctionalKind::OverlineUStar => Ok(constants.plus * pi_h),
        FunctionalKind::UnderlineUStar => Ok(constants.minus * pi_h),
        other => Err(Error::DomainMsg(format!("no heavy-tail asymptote for kind {}", other.name()))),
    }
}
