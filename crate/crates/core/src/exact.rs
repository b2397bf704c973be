//! Exact laws of the future drawdown and drawup extrema at exponential
//! horizons, and their inversion to fixed `(t, s)`.
//!
//! Formulas are assembled on the spectrally negative side. A spectrally
//! positive model is handled through its dual, using
//! `overline U*(X) = −underline D*(−X)` and `underline U*(X) = −overline D*(−X)`.
//!
//! With `T ~ e_q`, `S ~ e_β` (or `S = ∞`) and `g(y) = P(−X̲_S > y)`:
//!
//! * `P(overline U* > x) = [1 + q∫_0^x e^{−Φ(β)z} W^(q)(z) dz] / Z^(q)(x)`,
//! * `P(underline U* > x) = e^{−Φ(β)x} · q/(β − q) · (Φ(β) − Φ(q))/Φ(q)`,
//! * `P(−overline D* > x) = Φ(q) ∫_0^∞ e^{−Φ(q)z} g(x + z) dz`,
//! * `P(−underline D* > x) = E[e^{−qT^D_x}] + q ∫_{[0,x]} g(x − y) R^D_x(dy)`,
//!
//! where `g = Z^(β) − (β/Φ(β)) W^(β)` (`g = 1 − ψ'(0) W` for `S = ∞`) and
//! `R^D_x(dy) = W^(q)(x) W^(q)(dy)/W^(q)'_+(x) − W^(q)(y) dy`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::{self, Kernel};
use crate::model::{LevyModel, SignTag, POLE_GUARD};
use crate::numeric::laplace::stehfest_weights;
use crate::numeric::quad::{integrate, integrate_sqrt_singular, integrate_to_inf, QuadOpts};
use crate::numeric::stats::compensated_sum;
use crate::scale::ScaleEvaluator;
use crate::sim::functionals::FunctionalKind;
use crate::sim::mc::Lookahead;

/// Assembled values may leave `[0, 1]` by this much before it is an error.
pub const RANGE_TOL: f64 = 1e-6;

/// Target accuracy of the fixed-horizon inversion.
pub const INVERSION_TOL: f64 = 1e-4;

/// Largest Gaver–Stehfest term count tried in `q`.
pub const INVERSION_TERMS: usize = 16;

/// Relative gap below which `β` and `q` are treated as equal.
const MERGE_TOL: f64 = 1e-4;

fn quad_opts() -> QuadOpts {
    QuadOpts::with_tol(1e-13, 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HorizonSpec {
    /// `T ~ e_q`, `S ~ e_β`.
    Exponential { q: f64, beta: f64 },
    /// `T ~ e_q`, `S = ∞`.
    ExponentialInfinite { q: f64 },
    /// Fixed `T = t`, `S = s`, by inversion of the exponential-horizon laws.
    Fixed { t: f64, s: Lookahead },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactTailRequest {
    pub model: LevyModel,
    pub kind: FunctionalKind,
    pub horizon: HorizonSpec,
    pub x: f64,
}

impl ExactTailRequest {
    pub fn new(model: LevyModel, kind: FunctionalKind, horizon: HorizonSpec, x: f64) -> Result<Self> {
        reduce(&model, kind)?;
        if !(x >= 0.0) {
            return Err(Error::DomainMsg(format!("x = {x} must be nonnegative")));
        }
        Ok(Self { model, kind, horizon, x })
    }

    /// `P(kind > x)`, or `P(−kind > x)` for the future-drawdown kinds.
    pub fn eval(&self) -> Result<f64> {
        match self.horizon {
            HorizonSpec::Exponential { q, beta } => tail_exp_horizons(&self.model, self.kind, q, beta, self.x),
            HorizonSpec::ExponentialInfinite { q } => tail_exp_q_infinite_s(&self.model, self.kind, q, self.x),
            HorizonSpec::Fixed { t, s } => Ok(invert_to_fixed(&self.model, self.kind, t, s, self.x)?.value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    OverU,
    UnderU,
    OverD,
    UnderD,
}

/// Spectrally negative model and formula for `kind`.
fn reduce(model: &LevyModel, kind: FunctionalKind) -> Result<(LevyModel, Side)> {
    let (m, flip) = match model.sign_tag() {
        SignTag::SpectrallyNegative | SignTag::Continuous => (*model, false),
        SignTag::SpectrallyPositive => (model.dual(), true),
        SignTag::TwoSided => return Err(Error::UnsupportedModel("exact laws need one-sided jumps".into())),
    };
    let side = match (kind, flip) {
        (FunctionalKind::OverlineUStar, false) | (FunctionalKind::UnderlineDStar, true) => Side::OverU,
        (FunctionalKind::UnderlineUStar, false) | (FunctionalKind::OverlineDStar, true) => Side::UnderU,
        (FunctionalKind::OverlineDStar, false) | (FunctionalKind::UnderlineUStar, true) => Side::OverD,
        (FunctionalKind::UnderlineDStar, false) | (FunctionalKind::OverlineUStar, true) => Side::UnderD,
        _ => return Err(Error::DomainMsg(format!("no exact law for kind {}", kind.name()))),
    };
    let mean = m.mean();
    match side {
        Side::OverU | Side::UnderU if !(mean < 0.0) => {
            Err(Error::ConditionViolated(format!("{}: the model mean must be negative", kind.name())))
        }
        Side::OverD | Side::UnderD if !(mean > 0.0) => {
            Err(Error::ConditionViolated(format!("{}: the model mean must be positive", kind.name())))
        }
        _ => Ok((m, side)),
    }
}

pub(crate) fn check_range(p: f64) -> Result<f64> {
    if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&p) {
        return Err(Error::NumericRange { value: p });
    }
    if !(0.0..=1.0).contains(&p) {
        log::warn!("assembled probability {p} lies outside [0, 1]");
    }
    Ok(p)
}

/// `∫_0^x e^{−λz} W^(q)(z) dz`.
fn damped_w_integral(ev: &ScaleEvaluator, lambda: f64, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if let Some(e) = ev.exp_sum() {
        return Ok(e
            .terms
            .iter()
            .map(|&(a, r)| {
                let d = r - lambda;
                if d == 0.0 {
                    a * x
                } else {
                    a * (d * x).exp_m1() / d
                }
            })
            .sum());
    }
    integrate(|z| (-lambda * z).exp() * ev.w_q(z).unwrap_or(f64::NAN), 0.0, x, quad_opts())
}

/// `g(y) = P(−X̲_S > y)` for `S ~ e_β`, or `S = ∞` when `beta = 0`.
struct InfTail {
    ev: ScaleEvaluator,
    beta: f64,
    c: f64,
    /// `g(y) = c0 + Σ b_i e^{r_i y}` over the negative roots.
    expansion: Option<(f64, Vec<(f64, f64)>)>,
}

impl InfTail {
    fn new(m: &LevyModel, beta: Option<f64>) -> Result<Self> {
        let beta = beta.unwrap_or(0.0);
        let ev = ScaleEvaluator::new(m, beta)?;
        let c = if beta > 0.0 { beta / ev.phi_q() } else { m.psi_prime(0.0)? };
        let expansion = ev.exp_sum().map(|e| {
            let mut c0 = 1.0;
            let mut terms = Vec::new();
            for &(a, r) in &e.terms {
                if r >= 0.0 {
                    // the top root at Φ(β) cancels between Z and W
                    if beta > 0.0 {
                        c0 -= beta * a / r;
                    } else {
                        c0 -= c * a;
                    }
                } else {
                    let z_part = if beta > 0.0 { beta * a / r } else { 0.0 };
                    c0 -= z_part;
                    terms.push((z_part - c * a, r));
                }
            }
            (c0, terms)
        });
        Ok(Self { ev, beta, c, expansion })
    }

    fn eval(&self, y: f64) -> Result<f64> {
        let y = y.max(0.0);
        match &self.expansion {
            Some((c0, terms)) => Ok(c0 + terms.iter().map(|&(b, r)| b * (r * y).exp()).sum::<f64>()),
            None => {
                let z = if self.beta > 0.0 { self.ev.z_q(y)? } else { 1.0 };
                Ok(z - self.c * self.ev.w_q(y)?)
            }
        }
    }
}

/// `(Φ(β) − Φ(q))/(β − q)`, continuous through `β = q`.
fn phi_slope(m: &LevyModel, q: f64, beta: f64) -> Result<f64> {
    if (beta - q).abs() <= MERGE_TOL * q.max(beta) {
        return m.phi_prime(0.5 * (q + beta));
    }
    Ok((m.phi(beta)? - m.phi(q)?) / (beta - q))
}

fn assemble(m: &LevyModel, side: Side, q: f64, beta: Option<f64>, x: f64) -> Result<f64> {
    if !(q > 0.0) || beta.is_some_and(|b| !(b > 0.0)) {
        return Err(Error::DomainMsg("exponential horizons need q, beta > 0".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::DomainMsg(format!("x = {x} must be nonnegative")));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let phi_beta = m.phi(beta.unwrap_or(0.0))?;
    let p = match side {
        Side::OverU => {
            let ev = ScaleEvaluator::new(m, q)?;
            (1.0 + q * damped_w_integral(&ev, phi_beta, x)?) / ev.z_q(x)?
        }
        Side::UnderU => {
            let phi_q = m.phi(q)?;
            let factor = match beta {
                Some(b) => q * phi_slope(m, q, b)? / phi_q,
                None => (phi_q - phi_beta) / phi_q,
            };
            (-phi_beta * x).exp() * factor
        }
        Side::OverD => {
            let g = InfTail::new(m, beta)?;
            let phi_q = m.phi(q)?;
            match &g.expansion {
                Some((c0, terms)) => {
                    c0 + terms.iter().map(|&(b, r)| b * (r * x).exp() * phi_q / (phi_q - r)).sum::<f64>()
                }
                None => {
                    let f = |z: f64| phi_q * (-phi_q * z).exp() * g.eval(x + z).unwrap_or(f64::NAN);
                    integrate_to_inf(f, 0.0, quad_opts())?
                }
            }
        }
        Side::UnderD => {
            if x == 0.0 {
                let ev = ScaleEvaluator::new(m, q)?;
                // bounded variation: T^D_0 > 0 and the atom of W^(q) carries the mass
                return check_range(if ev.w_zero()? > 0.0 { under_d(m, q, beta, 1e-12)? } else { 1.0 });
            }
            under_d(m, q, beta, x)?
        }
    };
    check_range(p)
}

/// `(e^{rx} − e^{ρx})/(r − ρ) = ∫_0^x e^{ρ(x−z)} e^{rz} dz`.
fn conv_exp(r: f64, rho: f64, x: f64) -> f64 {
    let (hi, d) = (r.max(rho), (r - rho).abs());
    if d == 0.0 {
        x * (hi * x).exp()
    } else {
        (hi * x).exp() * -(-d * x).exp_m1() / d
    }
}

/// `1 + q∫_0^x ḡ(x−z) W^(q)(z) dz − q (W^(q)(x)/W^(q)'_+(x)) ∫_{[0,x]} ḡ(x−z) W^(q)(dz)`
/// with `ḡ = 1 − g`, the same expression as `E[e^{−qT^D_x}] + q∫ g R^D_x`.
fn under_d(m: &LevyModel, q: f64, beta: Option<f64>, x: f64) -> Result<f64> {
    let ev = ScaleEvaluator::new(m, q)?;
    let g = InfTail::new(m, beta)?;
    if let (Some(w), Some((c0, terms))) = (ev.exp_sum(), &g.expansion) {
        return Ok(under_d_expansion(q, &w.terms, *c0, terms, x));
    }
    let (wx, wpx) = (ev.w_q(x)?, ev.w_q_deriv_plus(x)?);
    let gbar = |y: f64| 1.0 - g.eval(y).unwrap_or(f64::NAN);
    let opts = quad_opts();
    let stieltjes = ev.w_zero()? * gbar(x)
        + integrate(|z| gbar(x - z) * ev.w_q_deriv_plus(z.max(1e-300)).unwrap_or(f64::NAN), 0.0, x, opts)?;
    let lebesgue = integrate(|z| gbar(x - z) * ev.w_q(z).unwrap_or(f64::NAN), 0.0, x, opts)?;
    Ok(1.0 + q * lebesgue - q * wx / wpx * stieltjes)
}

/// Closed form of [`under_d`] for `W^(q) = Σ a_i e^{r_i z}` and
/// `ḡ(y) = e_0 + Σ β_k e^{ρ_k y}`, with the `e^{Φ(q)x}` growth cancelled
/// analytically.
fn under_d_expansion(q: f64, w_terms: &[(f64, f64)], c0: f64, g_terms: &[(f64, f64)], x: f64) -> f64 {
    let mut gbar: Vec<(f64, f64)> = vec![(1.0 - c0, 0.0)];
    gbar.extend(g_terms.iter().map(|&(b, r)| (-b, r)));
    let top = (0..w_terms.len()).max_by(|&i, &j| w_terms[i].1.total_cmp(&w_terms[j].1)).unwrap_or(0);
    let (a0, phi) = w_terms[top];
    let rest: Vec<(f64, f64)> = w_terms.iter().enumerate().filter(|&(i, _)| i != top).map(|(_, &t)| t).collect();
    let k_sum: f64 = gbar.iter().map(|&(b, rho)| b / (phi - rho)).sum();
    let top_rem: f64 = gbar.iter().map(|&(b, rho)| b * (rho * x).exp() / (phi - rho)).sum();
    let conv = |weight: &dyn Fn(f64, f64) -> f64| -> f64 {
        rest.iter()
            .flat_map(|&(a, r)| gbar.iter().map(move |&(b, rho)| (a, r, b, rho)))
            .map(|(a, r, b, rho)| weight(a, r) * b * conv_exp(r, rho, x))
            .sum()
    };
    let r1 = q * (conv(&|a, _| a) - a0 * top_rem);
    let gbar_x: f64 = gbar.iter().map(|&(b, rho)| b * (rho * x).exp()).sum();
    let w0: f64 = w_terms.iter().map(|&(a, _)| a).sum();
    let r2 = gbar_x * w0 + conv(&|a, r| a * r) - a0 * phi * top_rem;
    let den = a0 * phi + rest.iter().map(|&(a, r)| a * r * ((r - phi) * x).exp()).sum::<f64>();
    let ratio = (a0 + rest.iter().map(|&(a, r)| a * ((r - phi) * x).exp()).sum::<f64>()) / den;
    let d: f64 = rest.iter().map(|&(a, r)| a * (r - phi) * (r * x).exp()).sum();
    1.0 + r1 - q * ratio * r2 + q * a0 * k_sum * d / den
}

/// Tail at `T ~ e_q`, `S ~ e_β`.
pub fn tail_exp_horizons(model: &LevyModel, kind: FunctionalKind, q: f64, beta: f64, x: f64) -> Result<f64> {
    let (m, side) = reduce(model, kind)?;
    assemble(&m, side, q, Some(beta), x)
}

/// Tail at `T ~ e_q` with an infinite lookahead.
pub fn tail_exp_q_infinite_s(model: &LevyModel, kind: FunctionalKind, q: f64, x: f64) -> Result<f64> {
    let (m, side) = reduce(model, kind)?;
    assemble(&m, side, q, None, x)
}

/// `E[U_t]`: closed form for Brownian motion, `∫_0^t E[X_s⁺] s⁻¹ ds` otherwise.
pub fn expected_drawup(model: &LevyModel, t: f64) -> Result<f64> {
    model.require_spectrally_negative("expected drawup")?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    if model.is_brownian() {
        return marginal::bm_max_mean(model.drift, model.sigma, t);
    }
    // E[X_s⁺]/s ~ s^{-1/2} at the origin
    let f = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        marginal::expect(model, s, Kernel::PositivePart).map_or(f64::NAN, |v| v / s)
    };
    let v = integrate_sqrt_singular(f, t, QuadOpts::with_tol(1e-13, 1e-10))?;
    if v.is_nan() {
        // propagate the marginal's own error
        marginal::expect(model, t, Kernel::PositivePart)?;
    }
    Ok(v)
}

/// `P(underline U*_t > x) = e^{−Φ(0)x}(1 − Φ(0) E[U_t])` with an infinite lookahead.
pub fn underline_ustar_fixed_t(model: &LevyModel, t: f64, x: f64) -> Result<f64> {
    model.require_spectrally_negative("fixed-horizon underline U*")?;
    if !(model.mean() < 0.0) {
        return Err(Error::ConditionViolated("underline_u_star: the model mean must be negative".into()));
    }
    let phi0 = model.phi(0.0)?;
    check_range((-phi0 * x).exp() * (1.0 - phi0 * expected_drawup(model, t)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleLaplaceKind {
    /// `P(underline U*_T ≤ u)`
    U,
    /// `P(−overline D*_T ≤ u)`
    D,
}

/// `∫_0^∞ e^{−sT} ∫_{[0,∞)} e^{−ru} P(· ≤ du) dT`, infinite lookahead,
/// spectrally negative model (mean negative for `U`, positive for `D`).
pub fn double_laplace(model: &LevyModel, r: f64, s: f64, which: DoubleLaplaceKind) -> Result<f64> {
    model.require_spectrally_negative("double Laplace transform")?;
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::DomainMsg("double Laplace transform needs r, s > 0".into()));
    }
    let phi_s = model.phi(s)?;
    match which {
        DoubleLaplaceKind::U => {
            if !(model.mean() < 0.0) {
                return Err(Error::ConditionViolated("U transform: the model mean must be negative".into()));
            }
            let phi0 = model.phi(0.0)?;
            Ok(phi0 * (phi_s + r) / ((phi0 + r) * s * phi_s))
        }
        DoubleLaplaceKind::D => {
            let d0 = model.psi_prime(0.0)?;
            if !(d0 > 0.0) {
                return Err(Error::ConditionViolated("D transform: the model mean must be positive".into()));
            }
            let gap = (r - phi_s).abs();
            if gap < POLE_GUARD * phi_s.max(1.0) {
                return Err(Error::PoleProximity { r, pole: phi_s, gap });
            }
            let psi_r = model.psi(r)?;
            Ok(r * d0 * phi_s * (psi_r - s) / (s * s * psi_r * (r - phi_s)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvertedValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// Stehfest sum with `n` terms over precomputed transform values at `k·ln2/t`.
fn stehfest_from(values: &[f64], scale: f64, n: usize) -> (f64, f64) {
    let w = stehfest_weights(n);
    let v = scale * compensated_sum(w.iter().zip(values).map(|(w, f)| w * f));
    let mass = scale * compensated_sum(w.iter().zip(values).map(|(w, f)| (w * f).abs()));
    (v, mass)
}

/// Value and error estimate (cancellation plus extrapolated truncation).
fn stehfest_estimate(values: &[f64], scale: f64, n: usize) -> (f64, f64, f64) {
    let (v, mass) = stehfest_from(values, scale, n);
    let (v2, _) = stehfest_from(values, scale, n - 2);
    let (v4, _) = stehfest_from(values, scale, n - 4);
    let (d1, d2) = ((v - v2).abs(), (v2 - v4).abs());
    let trunc = if d1 < d2 { d1 * d1 / d2 } else { d1 };
    (v, trunc + 4.0 * f64::EPSILON * mass, mass)
}

/// Law of the lookahead extrema over a fixed window `[0, s]`: closed form for
/// Brownian motion, inversion of `e^{−Φ(β)y}/β` and `g_β(y)/β` in `β` otherwise.
struct FixedAhead {
    model: LevyModel,
    s: f64,
    /// `Φ(β_j)` and `g_β_j` at the Stehfest abscissae `β_j = j ln2/s`.
    nodes: Vec<(f64, f64)>,
    tails: Vec<InfTail>,
}

/// Stehfest terms for the lookahead law.
const AHEAD_TERMS: usize = 14;

impl FixedAhead {
    fn new(m: &LevyModel, s: f64, need_inf: bool) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::DomainMsg(format!("s = {s} must be positive")));
        }
        let mut nodes = Vec::new();
        let mut tails = Vec::new();
        if !m.is_brownian() {
            let ls = std::f64::consts::LN_2 / s;
            for j in 1..=AHEAD_TERMS {
                let b = j as f64 * ls;
                nodes.push((b, m.phi(b)?));
                if need_inf {
                    tails.push(InfTail::new(m, Some(b))?);
                }
            }
        }
        Ok(Self { model: *m, s, nodes, tails })
    }

    /// Fixed term count keeps the result smooth in `y`.
    fn invert(&self, vals: &[f64]) -> f64 {
        let ls = std::f64::consts::LN_2 / self.s;
        stehfest_from(vals, ls, AHEAD_TERMS).0.clamp(0.0, 1.0)
    }

    /// `P(X̄_s > y)`.
    fn sup_survival(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        if self.model.is_brownian() {
            return marginal::bm_max_survival(self.model.drift, self.model.sigma, self.s, y);
        }
        let vals: Vec<f64> = self.nodes.iter().map(|&(b, phi)| (-phi * y).exp() / b).collect();
        self.invert(&vals)
    }

    /// `P(−X̲_s > y)`.
    fn inf_survival(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 1.0;
        }
        if self.model.is_brownian() {
            return marginal::bm_max_survival(-self.model.drift, self.model.sigma, self.s, y);
        }
        let vals: Vec<f64> =
            self.nodes.iter().zip(&self.tails).map(|(&(b, _), g)| g.eval(y).unwrap_or(f64::NAN) / b).collect();
        self.invert(&vals)
    }
}

/// Tails at `T ~ e_q` and a fixed lookahead `s`.
fn assemble_fixed(m: &LevyModel, side: Side, q: f64, ahead: &FixedAhead, x: f64) -> Result<f64> {
    // the inverted lookahead law carries ~1e-9 noise
    let opts = if m.is_brownian() { QuadOpts::with_tol(1e-14, 1e-13) } else { QuadOpts::with_tol(1e-10, 1e-9) };
    let ev = ScaleEvaluator::new(m, q)?;
    let phi_q = ev.phi_q();
    let w = |z: f64| ev.w_q(z).unwrap_or(f64::NAN);
    let p = match side {
        Side::OverU => {
            let i = integrate(|z| ahead.sup_survival(z) * w(z), 0.0, x, opts)?;
            (1.0 + q * i) / ev.z_q(x)?
        }
        Side::UnderU => {
            // D_{e_q} has atom (q/Φ(q))W^(q)(0) and density (q/Φ(q))W^(q)' − qW^(q)
            let dens = |z: f64| match ev.exp_sum() {
                Some(e) => {
                    let top = e.terms.iter().fold(f64::NEG_INFINITY, |m, t| m.max(t.1));
                    q / phi_q
                        * e.terms
                            .iter()
                            .filter(|t| t.1 != top)
                            .map(|&(a, r)| a * (r - top) * (r * z).exp())
                            .sum::<f64>()
                }
                None => q / phi_q * ev.w_q_deriv_plus(z.max(1e-300)).unwrap_or(f64::NAN) - q * w(z),
            };
            q / phi_q * ev.w_zero()? * ahead.sup_survival(x)
                + integrate_to_inf(|z| ahead.sup_survival(x + z) * dens(z), 0.0, opts)?
        }
        Side::OverD => integrate_to_inf(|z| phi_q * (-phi_q * z).exp() * ahead.inf_survival(x + z), 0.0, opts)?,
        Side::UnderD => {
            let gbar = |y: f64| 1.0 - ahead.inf_survival(y);
            let xe = x.max(1e-12);
            let (wx, wpx) = (ev.w_q(xe)?, ev.w_q_deriv_plus(xe)?);
            let stieltjes = ev.w_zero()? * gbar(xe)
                + integrate(|z| gbar(xe - z) * ev.w_q_deriv_plus(z.max(1e-300)).unwrap_or(f64::NAN), 0.0, xe, opts)?;
            let lebesgue = integrate(|z| gbar(xe - z) * w(z), 0.0, xe, opts)?;
            1.0 + q * lebesgue - q * wx / wpx * stieltjes
        }
    };
    check_range(p)
}

/// Stehfest value over `n = 8, 10, …, len` with the smallest error estimate.
fn best_stehfest(values: &[f64], scale: f64) -> (f64, f64) {
    let mut best = (f64::NAN, f64::INFINITY);
    let mut n = 8;
    while n <= values.len() {
        let (v, e, _) = stehfest_estimate(&values[..n], scale, n);
        if v.is_finite() && e < best.1 {
            best = (v, e);
        }
        n += 2;
    }
    best
}

/// Fixed-horizon tail by inversion in `q` of the law at `T ~ e_q`. A finite
/// lookahead enters through the law of the window extrema over `[0, s]`,
/// the inverse in `β` of the exponential-lookahead factors.
pub fn invert_to_fixed(model: &LevyModel, kind: FunctionalKind, t: f64, s: Lookahead, x: f64) -> Result<InvertedValue> {
    invert_to_fixed_with(model, kind, t, s, x, INVERSION_TERMS)
}

/// As [`invert_to_fixed`], with at most `terms` Stehfest weights.
pub fn invert_to_fixed_with(
    model: &LevyModel,
    kind: FunctionalKind,
    t: f64,
    s: Lookahead,
    x: f64,
    terms: usize,
) -> Result<InvertedValue> {
    let (m, side) = reduce(model, kind)?;
    if !(t > 0.0) {
        return Err(Error::DomainMsg(format!("t = {t} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::DomainMsg(format!("x = {x} must be nonnegative")));
    }
    if terms < 8 || terms % 2 == 1 {
        return Err(Error::DomainMsg(format!("Stehfest term count {terms} must be even and >= 8")));
    }
    let lt = std::f64::consts::LN_2 / t;
    let qs = (1..=terms).map(|k| k as f64 * lt);
    let vals = match s {
        Lookahead::Infinite => qs.map(|q| Ok(assemble(&m, side, q, None, x)? / q)).collect::<Result<Vec<f64>>>()?,
        Lookahead::Finite(s) => {
            let ahead = FixedAhead::new(&m, s, matches!(side, Side::OverD | Side::UnderD))?;
            qs.map(|q| Ok(assemble_fixed(&m, side, q, &ahead, x)? / q)).collect::<Result<Vec<f64>>>()?
        }
    };
    let (value, error) = best_stehfest(&vals, lt);
    if !(error <= INVERSION_TOL) {
        return Err(Error::PrecisionLoss { estimate: error });
    }
    Ok(InvertedValue { value: check_range(value)?, error_estimate: error })
}

/// Fixed-horizon tails on an `x` grid, raw and isotonically smoothed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedTailCurve {
    pub x: Vec<f64>,
    pub raw: Vec<f64>,
    pub error_estimate: Vec<f64>,
    /// Nonincreasing least-squares fit of `raw` in `x`.
    pub isotonic: Vec<f64>,
}

pub fn invert_curve(
    model: &LevyModel,
    kind: FunctionalKind,
    t: f64,
    s: Lookahead,
    xs: &[f64],
) -> Result<FixedTailCurve> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let x: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let vals = x.iter().map(|&x| invert_to_fixed(model, kind, t, s, x)).collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = vals.iter().map(|v| v.value).collect();
    for (xi, w) in x.iter().zip(raw.windows(2)) {
        if w[1] > w[0] {
            log::debug!("inverted tail increases after x = {xi}: {} -> {}", w[0], w[1]);
        }
    }
    Ok(FixedTailCurve {
        isotonic: nonincreasing_fit(&raw),
        error_estimate: vals.iter().map(|v| v.error_estimate).collect(),
        x,
        raw,
    })
}

/// Pool-adjacent-violators fit constrained to be nonincreasing.
pub fn nonincreasing_fit(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.pop();
            let n = na + nb;
            *blocks.last_mut().unwrap() = ((a * na as f64 + b * nb as f64) / n as f64, n);
        }
    }
    blocks.into_iter().flat_map(|(v, n)| std::iter::repeat_n(v, n)).collect()
}
