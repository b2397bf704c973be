//! Light-tailed asymptotics: Cramér and Höglund constants, exponential
//! moments of the drawup and drawdown, and the tilted limit laws of `X_t`.
//!
//! Ladder quantities come from spectrally one-sided closed forms only. For a
//! model `Y` without positive jumps, with `q`-roots `Φ_Y(q)`,
//!
//! * `E[e^{c Ȳ_t}] = 1 + c ∫_0^t E[e^{cY_s} Y_s⁺] s⁻¹ ds` (sup type),
//! * `E[e^{-c Y̲_t}] = e^{tψ_Y(-c)} + c ∫_0^t e^{(t-s)ψ_Y(-c)} E[Y_s⁺] s⁻¹ ds` (inf type),
//!
//! both obtained by inverting the Wiener–Hopf factors in `q` with Kendall's
//! identity. `U_t` has the law of the running supremum and `D_t` that of the
//! negated running infimum, so a model with positive jumps is handled
//! through its dual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::{bm_max_exp_moment, expect, Kernel};
use crate::model::{LevyModel, SignTag};
use crate::numeric::quad::{integrate_sqrt_singular, integrate_to_inf, QuadOpts};
use crate::sim::functionals::FunctionalKind;
use crate::sim::mc::{sample_values, Lookahead, SimConfig};

/// Relative half-width of the excluded band around `v = ψ'(γ)`.
pub const BOUNDARY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Cramer,
    Hoglund,
    HeavyTailed,
}

/// `approx(x) = prefactor · x^{-poly_exponent} · e^{-rate·x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailAsymptote {
    pub rate: f64,
    pub poly_exponent: f64,
    pub prefactor: f64,
    pub regime: Regime,
    pub kind: FunctionalKind,
    pub t: f64,
}

impl TailAsymptote {
    pub fn approx(&self, x: f64) -> f64 {
        self.prefactor * x.powf(-self.poly_exponent) * (-self.rate * x).exp()
    }
}

/// Ladder exponents `κ(β, θ)` and `κ̂(β, θ)` of a spectrally one-sided model,
/// normalised so that `β − ψ(θ) = κ(β, −θ) κ̂(β, θ)`.
#[derive(Debug, Clone, Copy)]
pub struct LadderExponent {
    model: LevyModel,
    /// `true` when the model has no positive jumps.
    negative: bool,
}

impl LadderExponent {
    pub fn new(model: &LevyModel) -> Result<Self> {
        model.require_one_sided("ladder exponent")?;
        Ok(Self { model: *model, negative: model.sign_tag().has_no_positive_jumps() })
    }

    /// `(β − ψ(θ)) / (Φ(β) − θ)` for `m` without positive jumps, with its
    /// removable singularity at `θ = Φ(β)`.
    fn ratio(m: &LevyModel, beta: f64, theta: f64) -> Result<f64> {
        let root = m.phi(beta)?;
        let den = root - theta;
        if den.abs() < 1e-8 * (1.0 + root.abs()) {
            return m.psi_prime(theta);
        }
        Ok((beta - m.psi(theta)?) / den)
    }

    pub fn kappa(&self, beta: f64, theta: f64) -> Result<f64> {
        if self.negative {
            Ok(self.model.phi(beta)? + theta)
        } else {
            // descending side of the dual is explicit
            Self::ratio(&self.model.dual(), beta, theta)
        }
    }

    pub fn kappa_hat(&self, beta: f64, theta: f64) -> Result<f64> {
        if self.negative {
            Self::ratio(&self.model, beta, theta)
        } else {
            Ok(self.model.dual().phi(beta)? + theta)
        }
    }
}

/// `C_γ`: 1 without positive jumps, `|ψ'(0)|/ψ'(γ)` without negative jumps.
pub fn cramer_constant(model: &LevyModel) -> Result<f64> {
    let gamma = model.cramer_gamma()?;
    match model.sign_tag() {
        SignTag::SpectrallyNegative | SignTag::Continuous => Ok(1.0),
        SignTag::SpectrallyPositive => Ok(model.mean().abs() / model.psi_prime(gamma)?),
        SignTag::TwoSided => Err(Error::UnsupportedModel("Cramer constant needs one-sided jumps".into())),
    }
}

fn moment_opts() -> QuadOpts {
    QuadOpts::with_tol(1e-13, 1e-10)
}

/// `E[e^{c Ȳ_t}]` for `Y` without positive jumps.
fn sup_type(y: &LevyModel, c: f64, t: f64) -> Result<f64> {
    let body = integrate_sqrt_singular(
        |s| expect(y, s, Kernel::ExpPositivePart(c)).unwrap_or(f64::NAN) / s,
        t,
        moment_opts(),
    )?;
    Ok(1.0 + c * body)
}

/// `E[e^{-c Y̲_t}]` for `Y` without positive jumps.
fn inf_type(y: &LevyModel, c: f64, t: f64) -> Result<f64> {
    let r = y.psi(-c)?;
    let body = integrate_sqrt_singular(
        |s| ((t - s) * r).exp() * expect(y, s, Kernel::PositivePart).unwrap_or(f64::NAN) / s,
        t,
        moment_opts(),
    )?;
    Ok((t * r).exp() + c * body)
}

fn check_moment_args(c: f64, t: f64) -> Result<bool> {
    if !(t >= 0.0) || !c.is_finite() {
        return Err(Error::DomainMsg(format!("exponential moment needs t >= 0 and finite c, got t = {t}, c = {c}")));
    }
    Ok(c == 0.0 || t == 0.0)
}

/// `∫_0^∞ e^{−qt} E[e^{cX_t} X_t⁺] t⁻¹ dt`, equal to `1/(Φ(q) − c)` for `c < Φ(q)`
/// when the model has no positive jumps.
pub fn kendall_transform(model: &LevyModel, q: f64, c: f64) -> Result<f64> {
    if !(q > 0.0) || !(q > model.psi(c)?) {
        return Err(Error::DomainMsg(format!("Kendall transform needs q > max(0, psi(c)), got q = {q}, c = {c}")));
    }
    let f = |t: f64| (-q * t).exp() * expect(model, t, Kernel::ExpPositivePart(c)).unwrap_or(f64::NAN) / t;
    let head = integrate_sqrt_singular(f, 1.0, moment_opts())?;
    Ok(head + integrate_to_inf(f, 1.0, moment_opts())?)
}

/// `E[e^{cU_t}]` through the one-dimensional laws of the model.
pub fn exp_moment_u_kendall(model: &LevyModel, c: f64, t: f64) -> Result<f64> {
    if check_moment_args(c, t)? {
        return Ok(1.0);
    }
    match model.sign_tag() {
        SignTag::SpectrallyNegative | SignTag::Continuous => sup_type(model, c, t),
        SignTag::SpectrallyPositive => inf_type(&model.dual(), c, t),
        SignTag::TwoSided => Err(Error::UnsupportedModel("drawup moments need one-sided jumps".into())),
    }
}

/// `E[e^{cD_t}]` through the one-dimensional laws of the model.
pub fn exp_moment_d_kendall(model: &LevyModel, c: f64, t: f64) -> Result<f64> {
    if check_moment_args(c, t)? {
        return Ok(1.0);
    }
    match model.sign_tag() {
        SignTag::SpectrallyNegative | SignTag::Continuous => inf_type(model, c, t),
        SignTag::SpectrallyPositive => sup_type(&model.dual(), c, t),
        SignTag::TwoSided => Err(Error::UnsupportedModel("drawdown moments need one-sided jumps".into())),
    }
}

/// `E[e^{cU_t}]`; Brownian motion uses the running-maximum law.
pub fn exp_moment_u(model: &LevyModel, c: f64, t: f64) -> Result<f64> {
    if check_moment_args(c, t)? {
        return Ok(1.0);
    }
    if model.is_brownian() {
        return bm_max_exp_moment(model.drift, model.sigma, t, c);
    }
    exp_moment_u_kendall(model, c, t)
}

/// `E[e^{cD_t}]`; Brownian motion uses the running-maximum law of `-X`.
pub fn exp_moment_d(model: &LevyModel, c: f64, t: f64) -> Result<f64> {
    if check_moment_args(c, t)? {
        return Ok(1.0);
    }
    if model.is_brownian() {
        return bm_max_exp_moment(-model.drift, model.sigma, t, c);
    }
    model.psi(-c)?;
    exp_moment_d_kendall(model, c, t)
}

/// Höglund constant `C̃_v = v^{3/2} / (η_v √(2π ψ''(ξ_v)))` for models without
/// positive jumps, valid for feasible `v > ψ'(γ)`.
pub fn hoglund_constant(model: &LevyModel, v: f64) -> Result<f64> {
    model.require_spectrally_negative("Hoglund constant")?;
    let ct = model.conjugate(v)?;
    if !(ct.eta_v > 0.0) {
        let gamma = model.cramer_gamma()?;
        return Err(Error::BoundaryProportion { v, boundary: model.psi_prime(gamma)? });
    }
    let curv = model.psi_second(ct.xi_v)?;
    Ok(v.powf(1.5) / (ct.eta_v * (2.0 * std::f64::consts::PI * curv).sqrt()))
}

/// Which moment multiplies the constant for each supported kind.
#[derive(Clone, Copy)]
enum Weight {
    None,
    Drawup,
    Drawdown,
}

/// Tail asymptote of `P(kind > x)` (or `P(kind < -x)` for future drawdowns)
/// and its value at `x`. Future-drawdown kinds use the dual model.
///
/// Pathwise `overline U*_t = max{Ũ + U_t, overline U_t}` and
/// `underline U*_t = (Ũ − D_t)⁺` with `Ũ` independent of `F_t`, so the
/// constant is multiplied by `E[e^{rU_t}]` and `E[e^{-rD_t}]` respectively.
pub fn tail_approx(
    model: &LevyModel,
    kind: FunctionalKind,
    t: f64,
    s: Lookahead,
    x: f64,
) -> Result<(TailAsymptote, f64)> {
    let (m, weight) = match kind {
        FunctionalKind::UStar => (*model, Weight::None),
        FunctionalKind::OverlineUStar => (*model, Weight::Drawup),
        FunctionalKind::UnderlineUStar => (*model, Weight::Drawdown),
        FunctionalKind::DStar => (model.dual(), Weight::None),
        FunctionalKind::OverlineDStar => (model.dual(), Weight::Drawdown),
        FunctionalKind::UnderlineDStar => (model.dual(), Weight::Drawup),
        other => {
            return Err(Error::DomainMsg(format!("no tail asymptote for kind {}", other.name())));
        }
    };
    let gamma = m.cramer_gamma()?;
    let (rate, poly, constant, regime) = match s {
        Lookahead::Infinite => (gamma, 0.0, cramer_constant(&m)?, Regime::Cramer),
        Lookahead::Finite(s) => {
            if !(s > 0.0 && x > 0.0) {
                return Err(Error::DomainMsg("finite-lookahead asymptotics need s > 0 and x > 0".into()));
            }
            let v = x / s;
            let ct = m.conjugate(v)?;
            let boundary = m.psi_prime(gamma)?;
            if (v - boundary).abs() < BOUNDARY_TOL * boundary {
                return Err(Error::BoundaryProportion { v, boundary });
            }
            if v < boundary {
                (gamma, 0.0, cramer_constant(&m)?, Regime::Cramer)
            } else {
                (ct.gamma_v, 0.5, hoglund_constant(&m, v)?, Regime::Hoglund)
            }
        }
    };
    let moment = match weight {
        Weight::None => 1.0,
        Weight::Drawup => exp_moment_u(&m, rate, t)?,
        Weight::Drawdown => exp_moment_d(&m, -rate, t)?,
    };
    let a = TailAsymptote { rate, poly_exponent: poly, prefactor: constant * moment, regime, kind, t };
    Ok((a, a.approx(x)))
}

/// Exponent `c` of the tilted laws `P^{(c)}(A) ∝ E[e^{cU_t} 1_A]` (drawup)
/// and `E[e^{-cD_t} 1_A]` (drawdown). These are the limit laws of `X_t`
/// given `overline U*_t > x` and `underline U*_t > x` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tilt {
    Gamma,
    /// `γ(v)` for a feasible proportion `v`.
    GammaV(f64),
    Value(f64),
}

impl Tilt {
    pub fn value(self, model: &LevyModel) -> Result<f64> {
        match self {
            Tilt::Gamma => model.cramer_gamma(),
            Tilt::GammaV(v) => Ok(model.conjugate(v)?.gamma_v),
            Tilt::Value(c) => Ok(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltSide {
    Drawup,
    Drawdown,
}

/// CDF of `X_t` under a tilted law on a grid of levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltedLaw {
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub mean: f64,
    pub ess: f64,
}

/// Self-normalised importance weighting of simulated `(X_t, U_t, D_t)`.
#[allow(clippy::too_many_arguments)]
pub fn tilted_conditional_law(
    model: &LevyModel,
    t: f64,
    tilt: Tilt,
    side: TiltSide,
    grid: &[f64],
    n: usize,
    seed: u64,
    cfg: &SimConfig,
    ess_floor: f64,
) -> Result<TiltedLaw> {
    let c = tilt.value(model)?;
    let rows = sample_values(model, t, Lookahead::Finite(0.0), n, seed, cfg)?;
    let logw: Vec<f64> = rows
        .iter()
        .map(|r| {
            c * match side {
                TiltSide::Drawup => r.drawup,
                TiltSide::Drawdown => -r.drawdown,
            }
        })
        .collect();
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let total = crate::numeric::stats::compensated_sum(w.iter().copied());
    let sq = crate::numeric::stats::compensated_sum(w.iter().map(|x| x * x));
    let ess = total * total / sq;
    if ess < ess_floor {
        return Err(Error::EffectiveSampleSize { ess, floor: ess_floor });
    }
    let mut order: Vec<(f64, f64)> = rows.iter().zip(&w).map(|(r, &wi)| (r.x_t, wi / total)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mean = crate::numeric::stats::compensated_sum(order.iter().map(|(x, p)| x * p));
    let mut cdf = Vec::with_capacity(grid.len());
    let (mut acc, mut k) = (0.0f64, 0);
    let mut sorted_grid: Vec<f64> = grid.to_vec();
    sorted_grid.sort_by(f64::total_cmp);
    for &g in &sorted_grid {
        while k < order.len() && order[k].0 <= g {
            acc += order[k].1;
            k += 1;
        }
        cdf.push(acc.min(1.0));
    }
    Ok(TiltedLaw { grid: sorted_grid, cdf, mean, ess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JumpComponent;

    fn bm() -> LevyModel {
        LevyModel::brownian(-0.5, 1.0).unwrap()
    }

    fn sn() -> LevyModel {
        LevyModel::new(-0.1, 0.4, None, Some(JumpComponent::exponential(1.0, 0.5))).unwrap()
    }

    fn sp() -> LevyModel {
        LevyModel::new(-1.0, 0.4, Some(JumpComponent::exponential(1.0, 0.5)), None).unwrap()
    }

    #[test]
    fn cramer_constants() {
        assert_eq!(cramer_constant(&bm()).unwrap(), 1.0);
        assert_eq!(cramer_constant(&sn()).unwrap(), 1.0);
        let m = sp();
        let g = m.cramer_gamma().unwrap();
        let c = cramer_constant(&m).unwrap();
        assert!((c - m.mean().abs() / m.psi_prime(g).unwrap()).abs() < 1e-15);
        assert!(c > 0.0 && c < 1.0);
        let two = LevyModel::kou(-0.5, 0.3, (1.0, 0.2), (1.0, 0.2)).unwrap();
        assert!(matches!(cramer_constant(&two), Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn ladder_exponent_matches_stationary_supremum() {
        // E[e^{-uU_∞}] = κ(0,0)/κ(0,u) = Φ(0)/(Φ(0)+u) without positive jumps
        let m = sn();
        let l = LadderExponent::new(&m).unwrap();
        let g = m.cramer_gamma().unwrap();
        for u in [0.1, 1.0, 3.0] {
            let r = l.kappa(0.0, 0.0).unwrap() / l.kappa(0.0, u).unwrap();
            assert!((r - g / (g + u)).abs() < 1e-12);
        }
    }

    #[test]
    fn ladder_factorisation() {
        for m in [sn(), sp(), bm()] {
            let l = LadderExponent::new(&m).unwrap();
            for (beta, theta) in [(0.5, 0.3), (1.0, -0.4), (2.0, 0.1)] {
                let lhs = beta - m.psi(theta).unwrap();
                let rhs = l.kappa(beta, -theta).unwrap() * l.kappa_hat(beta, theta).unwrap();
                assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "{lhs} {rhs}");
            }
        }
        // removable singularity: κ(0,0) = |ψ'(0)| when positive jumps are present
        let m = sp();
        let k = LadderExponent::new(&m).unwrap().kappa(0.0, 0.0).unwrap();
        assert!((k - m.mean().abs()).abs() < 1e-9, "{k}");
    }

    #[test]
    fn moments_trivial_cases() {
        for m in [bm(), sn(), sp()] {
            assert_eq!(exp_moment_u(&m, 0.0, 1.0).unwrap(), 1.0);
            assert_eq!(exp_moment_d(&m, 0.7, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn kendall_transform_inverts_to_phi() {
        let m = LevyModel::brownian(-0.5, 1.0).unwrap();
        let g = m.cramer_gamma().unwrap();
        for q in [1.0, 2.0, 5.0] {
            let v = kendall_transform(&m, q, g).unwrap();
            let target = 1.0 / (m.phi(q).unwrap() - g);
            assert!((v - target).abs() < 1e-7, "q={q}: {v} vs {target}");
        }
        let j = LevyModel::new(0.3, 0.5, None, Some(JumpComponent::exponential(1.0, 0.5))).unwrap();
        let v = kendall_transform(&j, 1.0, 0.4).unwrap();
        assert!((v - 1.0 / (j.phi(1.0).unwrap() - 0.4)).abs() < 1e-6);
    }

    #[test]
    fn kendall_route_matches_running_max_for_bm() {
        let m = bm();
        for (c, t) in [(1.0, 1.0), (0.5, 3.0), (-0.7, 2.0)] {
            let a = exp_moment_u(&m, c, t).unwrap();
            let b = exp_moment_u_kendall(&m, c, t).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "U {c} {t}: {a} {b}");
            let a = exp_moment_d(&m, c, t).unwrap();
            let b = exp_moment_d_kendall(&m, c, t).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "D {c} {t}: {a} {b}");
        }
    }

    #[test]
    fn moments_approach_stationary_limit() {
        // U_t → U_∞ ~ Exp(Φ(0)) without positive jumps
        let m = sn();
        let g = m.cramer_gamma().unwrap();
        let c = 0.5 * g;
        let v = exp_moment_u(&m, c, 200.0).unwrap();
        assert!((v - g / (g - c)).abs() < 1e-6, "{v}");
        // spectrally positive: E[e^{cU_∞}] = κ(0,0)/κ(0,-c) from the ladder exponent
        let m = sp();
        let l = LadderExponent::new(&m).unwrap();
        let g = m.cramer_gamma().unwrap();
        let c = 0.5 * g;
        let v = exp_moment_u(&m, c, 200.0).unwrap();
        let target = l.kappa(0.0, 0.0).unwrap() / l.kappa(0.0, -c).unwrap();
        assert!((v - target).abs() < 1e-5 * target, "{v} {target}");
    }

    #[test]
    fn hoglund_bm_closed_form() {
        // ξ = 2, η = 1, ψ'' = 1
        let c = hoglund_constant(&bm(), 1.5).unwrap();
        assert!((c - 1.5f64.powf(1.5) / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!(hoglund_constant(&sp(), 1.5).is_err());
    }

    #[test]
    fn hoglund_against_exact_running_max() {
        let m = bm();
        let v = 1.5;
        let ct = m.conjugate(v).unwrap();
        let c = hoglund_constant(&m, v).unwrap();
        let s = 400.0;
        let x = v * s;
        // both Gaussian tails of the reflection formula on the log scale (Mills series)
        let a = m.drift;
        let ln_tail = |z: f64| {
            -0.5 * z * z - (z * (2.0 * std::f64::consts::PI).sqrt()).ln() + (1.0 - 1.0 / (z * z) + 3.0 / z.powi(4)).ln()
        };
        let z1 = (x - a * s) / s.sqrt();
        let z2 = (x + a * s) / s.sqrt();
        let shift = ct.gamma_v * x + 0.5 * x.ln();
        let scaled = (ln_tail(z1) + shift).exp() + (ln_tail(z2) + 2.0 * a * x + shift).exp();
        assert!((scaled / c - 1.0).abs() < 0.01, "{scaled} vs {c}");
    }

    #[test]
    fn tail_approx_regimes() {
        let m = bm();
        let (a, p) = tail_approx(&m, FunctionalKind::OverlineUStar, 1.0, Lookahead::Infinite, 5.0).unwrap();
        assert_eq!(a.regime, Regime::Cramer);
        assert_eq!(a.rate, 1.0);
        assert!((a.prefactor - exp_moment_u(&m, 1.0, 1.0).unwrap()).abs() < 1e-14);
        assert!((p - a.prefactor * (-5.0f64).exp()).abs() < 1e-15);
        // ψ'(γ) = 0.5 for this model
        let (a, _) = tail_approx(&m, FunctionalKind::UnderlineUStar, 1.0, Lookahead::Finite(10.0), 15.0).unwrap();
        assert_eq!(a.regime, Regime::Hoglund);
        assert_eq!(a.poly_exponent, 0.5);
        let ct = m.conjugate(1.5).unwrap();
        assert!((a.rate - ct.gamma_v).abs() < 1e-14);
        let (a, _) = tail_approx(&m, FunctionalKind::OverlineUStar, 1.0, Lookahead::Finite(10.0), 2.0).unwrap();
        assert_eq!(a.regime, Regime::Cramer);
        let e = tail_approx(&m, FunctionalKind::OverlineUStar, 1.0, Lookahead::Finite(10.0), 5.0001);
        assert!(matches!(e, Err(Error::BoundaryProportion { .. })));
        assert!(tail_approx(&m, FunctionalKind::Drawup, 1.0, Lookahead::Infinite, 1.0).is_err());
    }

    #[test]
    fn bm_underline_matches_closed_form() {
        // P(underline U*_t > x) = e^{-Φ(0)x}(1 - Φ(0)E[U_t]) holds for every x ≥ 0
        let m = bm();
        let g = m.cramer_gamma().unwrap();
        for t in [0.5, 1.0, 4.0] {
            let eu = crate::marginal::bm_max_mean(m.drift, m.sigma, t).unwrap();
            for x in [0.5, 3.0, 10.0] {
                let (_, p) = tail_approx(&m, FunctionalKind::UnderlineUStar, t, Lookahead::Infinite, x).unwrap();
                let exact = (-g * x).exp() * (1.0 - g * eu);
                assert!((p / exact - 1.0).abs() < 1e-9, "t={t} x={x}: {p} {exact}");
            }
        }
    }

    #[test]
    fn assembly_is_exact_in_x() {
        let m = sn();
        let (a, _) = tail_approx(&m, FunctionalKind::OverlineUStar, 0.5, Lookahead::Infinite, 1.0).unwrap();
        for x in [1.0, 4.0, 9.0] {
            let k = a.approx(x) * (a.rate * x).exp() * x.powf(a.poly_exponent);
            assert!((k / a.prefactor - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_tilt_gives_unit_weights() {
        let cfg = SimConfig::default().with_step(0.01);
        let grid: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
        let law =
            tilted_conditional_law(&bm(), 1.0, Tilt::Value(0.0), TiltSide::Drawup, &grid, 2000, 3, &cfg, 10.0).unwrap();
        assert!((law.ess - 2000.0).abs() < 1e-6);
        assert!(law.cdf.windows(2).all(|w| w[0] <= w[1]));
        assert!((law.cdf.last().unwrap() - 1.0).abs() < 1e-12);
        let e = tilted_conditional_law(&bm(), 1.0, Tilt::Value(40.0), TiltSide::Drawup, &grid, 200, 3, &cfg, 150.0);
        assert!(matches!(e, Err(Error::EffectiveSampleSize { .. })));
    }
}
