//! Black–Scholes–Samuelson model `P_t = P_0 e^{X_t}` with
//! `X_t = (μ − σ²/2) t + σ W_t`.
//!
//! With `a = μ − σ²/2`, `ω = a/σ²`, `δ(q) = √(a² + 2σ²q)/σ²` and `γ = 2ω`:
//! `Φ(q) = −ω + δ(q)` and `γ` is the Cramér root of the dual `−X`.
//!
//! Reference values come from the exact running-extremum laws of drifted
//! Brownian motion. The closed-form displays with `Erfc` are evaluated as
//! printed in [`display`] and compared against the reference in
//! [`comparison_report`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::check_range;
use crate::marginal::bm_max_exp_moment;
use crate::model::LevyModel;
use crate::sim::functionals::FunctionalKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BssParams {
    pub mu: f64,
    pub sigma: f64,
}

impl BssParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidModel(format!("need finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    /// `a = μ − σ²/2`, the drift of `X`.
    pub fn drift(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }

    pub fn omega(&self) -> f64 {
        self.mu / (self.sigma * self.sigma) - 0.5
    }

    pub fn gamma(&self) -> f64 {
        2.0 * self.omega()
    }

    pub fn delta(&self, q: f64) -> f64 {
        let a = self.drift();
        let s2 = self.sigma * self.sigma;
        (a * a + 2.0 * s2 * q).sqrt() / s2
    }

    pub fn phi(&self, q: f64) -> f64 {
        -self.omega() + self.delta(q)
    }

    pub fn psi(&self, theta: f64) -> f64 {
        0.5 * self.sigma * self.sigma * theta * theta + self.drift() * theta
    }

    /// Drift of `X` under `P⁽¹⁾(A) = E[e^{X_t − ψ(1)t}; A]`.
    pub fn tilted_drift(&self) -> f64 {
        self.drift() + self.sigma * self.sigma
    }

    pub fn model(&self) -> Result<LevyModel> {
        LevyModel::brownian(self.drift(), self.sigma)
    }

    fn require_positive_drift(&self) -> Result<()> {
        if self.mu > 0.5 * self.sigma * self.sigma {
            Ok(())
        } else {
            Err(Error::ConditionViolated(format!("mu > sigma^2/2 (mu = {}, sigma = {})", self.mu, self.sigma)))
        }
    }
}

fn require_q(q: f64, strict: bool) -> Result<()> {
    if !q.is_finite() || q < 0.0 || (strict && q == 0.0) {
        return Err(Error::DomainMsg(format!("q = {q} must be {}", if strict { "> 0" } else { ">= 0" })));
    }
    Ok(())
}

/// `(W^(q)(x), Z^(q)(x))`.
pub fn bss_scale(p: &BssParams, q: f64, x: f64) -> Result<(f64, f64)> {
    require_q(q, false)?;
    if x <= 0.0 {
        return Ok((0.0, 1.0));
    }
    let s2 = p.sigma * p.sigma;
    let (w, d) = (p.omega(), p.delta(q));
    // sinh(δx)/δ, with its limit x at δ = 0
    let sinh_ratio = if d * x < 1e-8 { x } else { (d * x).sinh() / d };
    let scale_w = 2.0 * (-w * x).exp() * sinh_ratio / s2;
    let scale_z =
        if q == 0.0 { 1.0 } else { q / (d * s2) * (((d - w) * x).exp() / (d - w) + (-(w + d) * x).exp() / (w + d)) };
    Ok((scale_w, scale_z))
}

/// `W^(q)(x) / W^(q)'(x)`, bounded as `x → ∞`.
fn w_ratio(p: &BssParams, q: f64, x: f64) -> f64 {
    let (w, d) = (p.omega(), p.delta(q));
    let e = (-2.0 * d * x).exp();
    -(-2.0 * d * x).exp_m1() / ((d - w) + (d + w) * e)
}

/// `P(−overline D*_{e_q} > x)` or `P(−underline D*_{e_q} > x)` with an
/// infinite lookahead:
///
/// * overline: `1 − (a/(σ²ω))(1 − (δ(q) − ω)/(δ(q) + ω) e^{−2ωx})`, which is
///   `(δ(q) − ω)/(δ(q) + ω) e^{−2ωx}` since `a = σ²ω`,
/// * underline: `e^{−2ωx}(1 + 2ω W^(q)(x)/W^(q)'(x))`.
pub fn bss_tail_d_at_eq(p: &BssParams, q: f64, x: f64, kind: FunctionalKind) -> Result<f64> {
    p.require_positive_drift()?;
    require_q(q, true)?;
    let x = x.max(0.0);
    let (w, d) = (p.omega(), p.delta(q));
    let decay = (-2.0 * w * x).exp();
    let value = match kind {
        FunctionalKind::OverlineDStar => (d - w) / (d + w) * decay,
        FunctionalKind::UnderlineDStar => decay * (1.0 + 2.0 * w * w_ratio(p, q, x)),
        other => {
            return Err(Error::DomainMsg(format!("expected a future-drawdown kind, got {}", other.name())));
        }
    };
    check_range(value)
}

/// `E[e^{−2ω U_t}]`, from the running-maximum law (the drawup `U_t` has the
/// law of `X̄_t`).
pub fn sup_exp_moment(p: &BssParams, t: f64) -> Result<f64> {
    bm_max_exp_moment(p.drift(), p.sigma, t, -p.gamma())
}

/// `P(−overline D*_t > x) = 1 − (a/(σ²ω))(1 − E[e^{−2ωU_t}] e^{−2ωx}) = E[e^{−2ωU_t}] e^{−2ωx}`.
pub fn bss_tail_overline_d_fixed_t(p: &BssParams, t: f64, x: f64) -> Result<f64> {
    p.require_positive_drift()?;
    let m = sup_exp_moment(p, t)?;
    overline_d_fixed_from(p, m, x)
}

fn overline_d_fixed_from(p: &BssParams, moment: f64, x: f64) -> Result<f64> {
    check_range(moment * (-p.gamma() * x.max(0.0)).exp())
}

/// `E[e^{γU_t}]`, `E[e^{γD_t}]` and the same under `P⁽¹⁾`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpMoments {
    pub u: f64,
    pub d: f64,
    pub tilted_u: f64,
    pub tilted_d: f64,
}

impl ExpMoments {
    fn to_array(self) -> [f64; 4] {
        [self.u, self.d, self.tilted_u, self.tilted_d]
    }
}

/// Exponential moments of the drawup `U_t` (law of `X̄_t`) and drawdown `D_t`
/// (law of `−X̲_t`) at `γ = 2ω`, by quadrature of the reflection-principle
/// survival functions. Under `P⁽¹⁾` the drift is `a + σ²`.
pub fn bss_exp_moments(p: &BssParams, t: f64) -> Result<ExpMoments> {
    p.require_positive_drift()?;
    let (a, b, s, g) = (p.drift(), p.tilted_drift(), p.sigma, p.gamma());
    Ok(ExpMoments {
        u: bm_max_exp_moment(a, s, t, g)?,
        d: bm_max_exp_moment(-a, s, t, g)?,
        tilted_u: bm_max_exp_moment(b, s, t, g)?,
        tilted_d: bm_max_exp_moment(-b, s, t, g)?,
    })
}

/// `(overline E[P_t], underline E[P_t]) = P_0 e^{ψ(1)t} (E⁽¹⁾[e^{γU_t}]/E[e^{γU_t}], E⁽¹⁾[e^{γD_t}]/E[e^{γD_t}])`.
pub fn bss_price_expectations(p: &BssParams, p0: f64, t: f64) -> Result<(f64, f64)> {
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(Error::DomainMsg(format!("P0 = {p0} must be positive")));
    }
    let m = bss_exp_moments(p, t)?;
    Ok(prices_from(p, p0, t, &m))
}

fn prices_from(p: &BssParams, p0: f64, t: f64, m: &ExpMoments) -> (f64, f64) {
    let base = p0 * (p.psi(1.0) * t).exp();
    (base * m.tilted_u / m.u, base * m.tilted_d / m.d)
}

/// The closed-form displays, transcribed as printed.
pub mod display {
    use super::{BssParams, ExpMoments};
    use crate::bss::bss_scale;
    use libm::erfc;
    use std::f64::consts::SQRT_2;

    /// Long display for `P(−underline D*_{e_q} > x)`.
    pub fn underline_d_at_eq(p: &BssParams, q: f64, x: f64) -> f64 {
        let (mu, s) = (p.mu, p.sigma);
        let s2 = s * s;
        let (w, d) = (p.omega(), p.delta(q));
        let (sw, sz) = match bss_scale(p, q, x) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        let sw_prime = (-w + d) / (d * s2) * ((-w + d) * x).exp() + (w + d) / (d * s2) * (-(w + d) * x).exp();
        let lead = (mu - s2 / 2.0) / (s2 * s2 * d * w);
        let e_minus = (-(d + w) * x).exp();
        let e_plus = ((d - w) * x).exp();
        let e_2w = (-2.0 * w * x).exp();
        let dd = d * d - w * w;
        1.0 + lead * (sz - 1.0)
            + q * lead * (e_minus / (d - w) - e_plus / (d + w) - 2.0 * w / dd * e_2w)
            + (mu - s2) * sw / sw_prime
                * ((d + w) / (d - w) * e_minus + (d - w) / (d + w) * e_plus - 2.0 * d / dd * e_2w)
    }

    /// `P(−overline D*_{e_q} > x)` display.
    pub fn overline_d_at_eq(p: &BssParams, q: f64, x: f64) -> f64 {
        let (s2, w, d) = (p.sigma * p.sigma, p.omega(), p.delta(q));
        1.0 - (p.mu - s2 / 2.0) / (s2 * w) * (1.0 - (-w + d) / (w + d) * (-2.0 * w * x).exp())
    }

    /// `P(−overline D*_t > x)` display, given `E[e^{−2ωU_t}]`.
    pub fn overline_d_fixed_t(p: &BssParams, sup_moment: f64, x: f64) -> f64 {
        let (s2, w) = (p.sigma * p.sigma, p.omega());
        1.0 - (p.mu - s2 / 2.0) / (s2 * w) * (1.0 - sup_moment * (-2.0 * w * x).exp())
    }

    /// `E[e^{−2ωU_t}]` display.
    pub fn sup_exp_moment(p: &BssParams, t: f64) -> f64 {
        let (s, w) = (p.sigma, p.omega());
        let s2 = s * s;
        let rt = t.sqrt();
        (2.0 - s2) / (2.0 - 2.0 * s2) * (w * w * (1.0 - s2) / s2 * t).exp() * erfc(w * (2.0 - s2) / (SQRT_2 * s) * rt)
            - s2 / (2.0 - 2.0 * s2) * erfc(w * s / SQRT_2 * rt)
    }

    /// The four `Erfc` displays for `E[e^{γU_t}]`, `E[e^{γD_t}]`,
    /// `E⁽¹⁾[e^{γU_t}]`, `E⁽¹⁾[e^{γD_t}]`.
    pub fn exp_moments(p: &BssParams, t: f64) -> ExpMoments {
        let (mu, s, w) = (p.mu, p.sigma, p.omega());
        let s2 = s * s;
        let s4 = s2 * s2;
        let rt = t.sqrt();
        let plain = |sign: f64| {
            (2.0 + s2) / (2.0 + 2.0 * s2)
                * (w * w * (1.0 + s2) / s2 * t).exp()
                * erfc(-sign * w * (2.0 + s2) / (SQRT_2 * s) * rt)
                + s2 / (2.0 + 2.0 * s2) * erfc(sign * w * s / SQRT_2 * rt)
        };
        let tilted = |sign: f64| {
            let k = 2.0 * mu - s2;
            (1.0 + s2) / (1.0 + 2.0 * s2)
                * (w * (k * (s2 + 1.0) - s4) / s4 * t).exp()
                * erfc(-sign * (k * (s2 + 2.0) - 2.0 * s4) / (2.0 * SQRT_2 * s2 * s) * rt)
                + s2 * (2.0 * mu - 3.0 * s2) / ((4.0 * mu - 2.0 * s2) * (1.0 + s2) - 4.0 * s4)
                    * erfc(sign * (2.0 * mu - 3.0 * s2) / (2.0 * SQRT_2 * s) * rt)
        };
        ExpMoments { u: plain(1.0), d: plain(-1.0), tilted_u: tilted(1.0), tilted_d: tilted(-1.0) }
    }
}

/// Reference and display value side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Compared {
    pub reference: f64,
    pub display: f64,
    /// `|display − reference| / |reference|`; non-finite when the display is.
    pub rel_deviation: f64,
}

impl Compared {
    pub fn new(reference: f64, display: f64) -> Self {
        let rel_deviation = if display.is_finite() {
            (display - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
        } else {
            f64::INFINITY
        };
        Self { reference, display, rel_deviation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BssRow {
    pub x: f64,
    pub overline_d_eq: Compared,
    pub underline_d_eq: Compared,
    pub overline_d_fixed_t: Compared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BssReport {
    pub params: BssParams,
    pub p0: f64,
    pub t: f64,
    pub q: f64,
    pub omega: f64,
    pub gamma: f64,
    pub delta_q: f64,
    pub phi_q: f64,
    pub sup_exp_moment: Compared,
    pub exp_moments: [Compared; 4],
    pub prices: [Compared; 2],
    pub rows: Vec<BssRow>,
}

/// Every quantity on an `x` grid, reference against display.
pub fn comparison_report(p: &BssParams, p0: f64, t: f64, q: f64, xs: &[f64]) -> Result<BssReport> {
    let sup_ref = sup_exp_moment(p, t)?;
    let sup_disp = display::sup_exp_moment(p, t);
    let m_ref = bss_exp_moments(p, t)?;
    let m_disp = display::exp_moments(p, t);
    let pr_ref = bss_price_expectations(p, p0, t)?;
    let pr_disp = prices_from(p, p0, t, &m_disp);
    let (r, d) = (m_ref.to_array(), m_disp.to_array());
    let rows = xs
        .iter()
        .map(|&x| {
            Ok(BssRow {
                x,
                overline_d_eq: Compared::new(
                    bss_tail_d_at_eq(p, q, x, FunctionalKind::OverlineDStar)?,
                    display::overline_d_at_eq(p, q, x),
                ),
                underline_d_eq: Compared::new(
                    bss_tail_d_at_eq(p, q, x, FunctionalKind::UnderlineDStar)?,
                    display::underline_d_at_eq(p, q, x),
                ),
                overline_d_fixed_t: Compared::new(
                    overline_d_fixed_from(p, sup_ref, x)?,
                    display::overline_d_fixed_t(p, sup_disp, x),
                ),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for row in &rows {
        if [row.overline_d_eq, row.underline_d_eq, row.overline_d_fixed_t].iter().any(|c| c.rel_deviation > 1e-8) {
            log::warn!("display values deviate from the reference at x = {}", row.x);
        }
    }
    Ok(BssReport {
        params: *p,
        p0,
        t,
        q,
        omega: p.omega(),
        gamma: p.gamma(),
        delta_q: p.delta(q),
        phi_q: p.phi(q),
        sup_exp_moment: Compared::new(sup_ref, sup_disp),
        exp_moments: std::array::from_fn(|i| Compared::new(r[i], d[i])),
        prices: [Compared::new(pr_ref.0, pr_disp.0), Compared::new(pr_ref.1, pr_disp.1)],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{invert_to_fixed, tail_exp_q_infinite_s};
    use crate::scale::ScaleEvaluator;
    use crate::sim::mc::{mc_expectation, mc_ratio, Lookahead, SimConfig};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn unit() -> BssParams {
        BssParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn parameters() {
        let p = unit();
        assert_eq!((p.drift(), p.omega(), p.gamma()), (0.5, 0.5, 1.0));
        assert!((p.delta(0.0) - p.omega().abs()).abs() < 1e-15);
        let neg = BssParams::new(0.1, 1.0).unwrap();
        assert!((neg.delta(0.0) - neg.omega().abs()).abs() < 1e-15);
        // γ is the Cramér root of the dual
        let dual = p.model().unwrap().dual();
        assert!(dual.psi(p.gamma()).unwrap().abs() < 1e-14);
        for p in [unit(), BssParams::new(0.3, 0.4).unwrap(), BssParams::new(2.0, 1.5).unwrap()] {
            let m = p.model().unwrap();
            for q in [0.0, 0.01, 0.5, 1.0, 3.0, 20.0] {
                let (a, b) = (p.phi(q), m.phi(q).unwrap());
                assert!((a - b).abs() < 1e-12 * (1.0 + b), "q={q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn scale_matches_general_evaluator() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let ps = [unit(), BssParams::new(0.3, 0.4).unwrap(), BssParams::new(0.2, 1.2).unwrap()];
        for i in 0..50 {
            let p = ps[i % ps.len()];
            let q: f64 = rng.random_range(0.0..5.0);
            let x: f64 = rng.random_range(0.0..6.0);
            let ev = ScaleEvaluator::new(&p.model().unwrap(), q).unwrap();
            let (w, z) = bss_scale(&p, q, x).unwrap();
            let (w2, z2) = (ev.w_q(x).unwrap(), ev.z_q(x).unwrap());
            assert!((w - w2).abs() <= 1e-12 * w2.abs().max(1.0), "W q={q} x={x}: {w} vs {w2}");
            assert!((z - z2).abs() <= 1e-12 * z2.abs().max(1.0), "Z q={q} x={x}: {z} vs {z2}");
        }
        assert_eq!(bss_scale(&unit(), 1.0, 0.0).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn scale_laplace_round_trip() {
        let p = BssParams::new(0.8, 0.7).unwrap();
        let q = 0.6;
        for lambda in [p.phi(q) + 0.5, p.phi(q) + 3.0] {
            let f = |x: f64| (-lambda * x).exp() * bss_scale(&p, q, x).unwrap().0;
            let v =
                crate::numeric::quad::integrate(f, 0.0, 80.0, crate::numeric::quad::QuadOpts::with_tol(1e-14, 1e-12))
                    .unwrap();
            let target = 1.0 / (p.psi(lambda) - q);
            assert!((v - target).abs() < 1e-9 * target, "{v} vs {target}");
        }
    }

    #[test]
    fn drawdown_tails_at_exponential_time() {
        let p = unit();
        for x in [0.0, 0.3, 1.0, 2.5, 6.0] {
            let over = bss_tail_d_at_eq(&p, 1.0, x, FunctionalKind::OverlineDStar).unwrap();
            assert!((over - 0.5 * (-x).exp()).abs() < 1e-14);
        }
        for p in [unit(), BssParams::new(0.9, 0.6).unwrap(), BssParams::new(2.0, 1.5).unwrap()] {
            let m = p.model().unwrap();
            for q in [0.2, 1.0, 4.0] {
                for x in [0.0, 0.1, 0.7, 2.0, 5.0] {
                    for kind in [FunctionalKind::OverlineDStar, FunctionalKind::UnderlineDStar] {
                        let a = bss_tail_d_at_eq(&p, q, x, kind).unwrap();
                        let b = tail_exp_q_infinite_s(&m, kind, q, x).unwrap();
                        assert!((a - b).abs() < 1e-10, "{kind:?} q={q} x={x}: {a} vs {b}");
                    }
                }
            }
        }
        assert_eq!(bss_tail_d_at_eq(&p, 1.0, 0.0, FunctionalKind::UnderlineDStar).unwrap(), 1.0);
        assert!(bss_tail_d_at_eq(&p, 1.0, 200.0, FunctionalKind::UnderlineDStar).unwrap() < 1e-80);
        assert!(bss_tail_d_at_eq(&p, 1.0, 1.0, FunctionalKind::Drawdown).is_err());
        let low = BssParams::new(0.4, 1.0).unwrap();
        assert!(matches!(
            bss_tail_d_at_eq(&low, 1.0, 1.0, FunctionalKind::OverlineDStar),
            Err(Error::ConditionViolated(_))
        ));
    }

    #[test]
    fn overline_display_agrees() {
        let p = BssParams::new(1.3, 0.7).unwrap();
        for x in [0.0, 0.4, 2.0] {
            let r = bss_tail_d_at_eq(&p, 0.8, x, FunctionalKind::OverlineDStar).unwrap();
            assert!((r - display::overline_d_at_eq(&p, 0.8, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn underline_display_deviates() {
        let p = unit();
        let r = bss_tail_d_at_eq(&p, 1.0, 1.0, FunctionalKind::UnderlineDStar).unwrap();
        let d = display::underline_d_at_eq(&p, 1.0, 1.0);
        assert!((r - d).abs() > 1e-3, "{r} vs {d}");
    }

    #[test]
    fn overline_fixed_t_limits_and_inversion() {
        let p = unit();
        for x in [0.0, 0.5, 2.0] {
            let v = bss_tail_overline_d_fixed_t(&p, 1e-20, x).unwrap();
            assert!((v - (-x).exp()).abs() < 1e-9);
        }
        assert!(bss_tail_overline_d_fixed_t(&p, 400.0, 0.5).unwrap() < 1e-12);
        let m = p.model().unwrap();
        for (t, x) in [(1.0, 0.5), (2.0, 0.2)] {
            let v = bss_tail_overline_d_fixed_t(&p, t, x).unwrap();
            let inv = invert_to_fixed(&m, FunctionalKind::OverlineDStar, t, Lookahead::Infinite, x).unwrap();
            assert!((v - inv.value).abs() < 1e-5, "t={t} x={x}: {v} vs {inv:?}");
        }
    }

    #[test]
    fn exp_moments_limits() {
        let p = unit();
        let m = bss_exp_moments(&p, 1e-14).unwrap();
        for v in m.to_array() {
            assert!((v - 1.0).abs() < 1e-6);
        }
        let flat = BssParams::new(0.5 + 1e-9, 1.0).unwrap();
        for v in bss_exp_moments(&flat, 2.0).unwrap().to_array() {
            assert!((v - 1.0).abs() < 1e-7);
        }
        let (hi, lo) = bss_price_expectations(&flat, 3.0, 2.0).unwrap();
        let plain = 3.0 * (flat.psi(1.0) * 2.0).exp();
        assert!((hi - plain).abs() < 1e-6 * plain && (lo - plain).abs() < 1e-6 * plain);
        let (hi, lo) = bss_price_expectations(&p, 3.0, 1e-14).unwrap();
        assert!((hi - 3.0).abs() < 1e-6 && (lo - 3.0).abs() < 1e-6);
    }

    #[test]
    fn exp_moments_match_monte_carlo() {
        let p = unit();
        let m = p.model().unwrap();
        let cfg = SimConfig { bridge: true, ..SimConfig::default() };
        let r = bss_exp_moments(&p, 1.0).unwrap();
        let g = p.gamma();
        let u = mc_expectation(&m, 1.0, Lookahead::Finite(1.0), 20_000, 21, &cfg, |v| (g * v.drawup).exp()).unwrap();
        let d = mc_expectation(&m, 1.0, Lookahead::Finite(1.0), 20_000, 21, &cfg, |v| (g * v.drawdown).exp()).unwrap();
        assert!(u.agrees_with(r.u, 4.0), "{} vs {u:?}", r.u);
        assert!(d.agrees_with(r.d, 4.0), "{} vs {d:?}", r.d);
        let (hi, lo) = bss_price_expectations(&p, 1.0, 1.0).unwrap();
        let whi = mc_ratio(
            &m,
            1.0,
            Lookahead::Finite(1.0),
            20_000,
            22,
            &cfg,
            |v| (g * v.drawup + v.x_t).exp(),
            |v| (g * v.drawup).exp(),
        )
        .unwrap();
        let wlo = mc_ratio(
            &m,
            1.0,
            Lookahead::Finite(1.0),
            20_000,
            22,
            &cfg,
            |v| (g * v.drawdown + v.x_t).exp(),
            |v| (g * v.drawdown).exp(),
        )
        .unwrap();
        assert!(whi.agrees_with(hi, 4.0), "{hi} vs {whi:?}");
        assert!(wlo.agrees_with(lo, 4.0), "{lo} vs {wlo:?}");
    }

    #[test]
    fn report_is_complete() {
        let p = unit();
        let rep = comparison_report(&p, 1.0, 1.0, 1.0, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(rep.rows.len(), 3);
        // singular display at σ = 1
        assert!(!rep.sup_exp_moment.display.is_finite());
        assert!(rep.sup_exp_moment.rel_deviation.is_infinite());
        let p2 = BssParams::new(0.6, 0.5).unwrap();
        let rep2 = comparison_report(&p2, 1.0, 1.0, 1.0, &[0.5]).unwrap();
        assert!(rep2.exp_moments.iter().all(|c| c.reference.is_finite() && c.display.is_finite()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn tails_are_probabilities(mu in 0.3f64..3.0, sigma in 0.2f64..1.5, q in 0.05f64..5.0, x in 0.0f64..20.0) {
            prop_assume!(mu > 0.5 * sigma * sigma + 0.01);
            let p = BssParams::new(mu, sigma).unwrap();
            for kind in [FunctionalKind::OverlineDStar, FunctionalKind::UnderlineDStar] {
                let v = bss_tail_d_at_eq(&p, q, x, kind).unwrap();
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let over = bss_tail_d_at_eq(&p, q, x, FunctionalKind::OverlineDStar).unwrap();
            let under = bss_tail_d_at_eq(&p, q, x, FunctionalKind::UnderlineDStar).unwrap();
            prop_assert!(over <= under + 1e-15);
            let f = bss_tail_overline_d_fixed_t(&p, 1.0, x).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
