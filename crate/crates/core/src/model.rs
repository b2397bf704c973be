//! Process catalogue and Laplace-exponent machinery.
//!
//! A [`LevyModel`] is a drifted Brownian motion plus at most one upward and
//! one downward compound-Poisson jump component. Jump sizes are exponential
//! (the Kou family, rational exponent) or, for heavy-tail work, the tempered
//! Pareto law with density proportional to `e^{-αx}(1+x)^{-3/2}`.

use num::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::quad::{integrate, QuadOpts};
use crate::numeric::roots::newton_bisect;

/// Distance from an exponential-jump pole below which the exponent is not evaluated.
pub const POLE_GUARD: f64 = 1e-9;

const ROOT_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpLaw {
    /// Exponential jump sizes with the given rate (mean `1 / rate`).
    Exponential { rate: f64 },
    /// Jump-size density `e^{-αx}(1+x)^{-3/2} / K` on `(0, ∞)`.
    TemperedPareto { alpha: f64 },
}

impl JumpLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::Exponential { rate } => 1.0 / rate,
            JumpLaw::TemperedPareto { alpha } => tempered_moment(alpha, 1.0) / tempered_moment(alpha, 0.0),
        }
    }

    /// Density of the jump size at `x > 0`.
    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 || x == f64::INFINITY {
            return 0.0;
        }
        match *self {
            JumpLaw::Exponential { rate } => rate * (-rate * x).exp(),
            JumpLaw::TemperedPareto { alpha } => {
                (-alpha * x).exp() * (1.0 + x).powf(-1.5) / tempered_moment(alpha, 0.0)
            }
        }
    }

    /// `P(J > u)`.
    pub fn survival(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 1.0;
        }
        match *self {
            JumpLaw::Exponential { rate } => (-rate * u).exp(),
            JumpLaw::TemperedPareto { alpha } => {
                // x = u + w shifts the tail integral onto (0, ∞)
                let shifted = tempered_shifted(alpha, u, |_| 1.0);
                shifted / tempered_moment(alpha, 0.0)
            }
        }
    }

    /// `E[(J − u)⁺ e^{-φ(J−u)}]`-type integrals `∫_u^∞ f(x) h(x − u) dx`.
    pub fn tail_integral<H: Fn(f64) -> f64>(&self, u: f64, h: H) -> f64 {
        let u = u.max(0.0);
        match *self {
            JumpLaw::Exponential { rate } => {
                let opts = QuadOpts::with_tol(1e-15, 1e-12);
                (-rate * u).exp()
                    * crate::numeric::quad::integrate_to_inf(|w| rate * (-rate * w).exp() * h(w), 0.0, opts)
                        .unwrap_or(f64::NAN)
            }
            JumpLaw::TemperedPareto { alpha } => tempered_shifted(alpha, u, h) / tempered_moment(alpha, 0.0),
        }
    }

    /// Upper end of the moment-generating function's domain and whether it is attained.
    fn mgf_bound(&self) -> (f64, bool) {
        match *self {
            JumpLaw::Exponential { rate } => (rate, false),
            JumpLaw::TemperedPareto { alpha } => (alpha, true),
        }
    }

    /// `E[e^{θJ}]` and its first two derivatives.
    fn mgf(&self, theta: f64) -> [f64; 3] {
        match *self {
            JumpLaw::Exponential { rate } => {
                let d = rate - theta;
                [rate / d, rate / (d * d), 2.0 * rate / (d * d * d)]
            }
            JumpLaw::TemperedPareto { alpha } => {
                let k = tempered_moment(alpha, 0.0);
                let beta = alpha - theta;
                let m0 = tempered_moment(beta, 0.0) / k;
                let (m1, m2) = if beta > 0.0 {
                    (tempered_moment(beta, 1.0) / k, tempered_moment(beta, 2.0) / k)
                } else {
                    (f64::INFINITY, f64::INFINITY)
                };
                [m0, m1, m2]
            }
        }
    }
}

/// `∫_0^∞ x^p e^{-βx} (1+x)^{-3/2} dx`; infinite when the tail is not integrable.
pub(crate) fn tempered_moment(beta: f64, p: f64) -> f64 {
    if beta <= 0.0 && p >= 0.5 {
        return f64::INFINITY;
    }
    let opts = QuadOpts::with_tol(1e-15, 1e-13);
    let head = integrate(|x| x.powf(p) * (-beta * x).exp() * (1.0 + x).powf(-1.5), 0.0, 1.0, opts);
    // x = 1/u² maps the algebraic tail onto (0, 1]
    let tail = integrate(
        |u| {
            let u2 = u * u;
            2.0 * u2.powf(-p) * (-beta / u2).exp() * (1.0 + u2).powf(-1.5)
        },
        0.0,
        1.0,
        opts,
    );
    match (head, tail) {
        (Ok(h), Ok(t)) => h + t,
        _ => f64::INFINITY,
    }
}

/// `∫_0^∞ e^{-α(u+w)} (1+u+w)^{-3/2} h(w) dw` for `h` of at most polynomial growth.
fn tempered_shifted<H: Fn(f64) -> f64>(alpha: f64, u: f64, h: H) -> f64 {
    let opts = QuadOpts::with_tol(1e-300, 1e-12);
    let a = 1.0 + u;
    let f = |w: f64| (-alpha * w).exp() * (1.0 + w / a).powf(-1.5) * h(w);
    let head = integrate(f, 0.0, a, opts);
    // w = a/v² maps the remaining tail onto (0, 1]
    let tail = integrate(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            let w = a / (v * v);
            2.0 * a / (v * v * v) * f(w)
        },
        0.0,
        1.0,
        opts,
    );
    let scale = (-alpha * u).exp() * a.powf(-1.5);
    match (head, tail) {
        (Ok(hd), Ok(tl)) => scale * (hd + tl),
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpComponent {
    /// Poisson arrival rate of jumps.
    pub intensity: f64,
    #[serde(flatten)]
    pub law: JumpLaw,
}

impl JumpComponent {
    pub fn exponential(intensity: f64, mean: f64) -> Self {
        Self { intensity, law: JumpLaw::Exponential { rate: 1.0 / mean } }
    }

    pub fn tempered_pareto(intensity: f64, alpha: f64) -> Self {
        Self { intensity, law: JumpLaw::TemperedPareto { alpha } }
    }

    /// Lévy tail `intensity · P(J > u)`.
    pub fn tail(&self, u: f64) -> f64 {
        self.intensity * self.law.survival(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignTag {
    SpectrallyNegative,
    SpectrallyPositive,
    TwoSided,
    Continuous,
}

impl SignTag {
    /// No positive jumps (Brownian motion included).
    pub fn has_no_positive_jumps(self) -> bool {
        matches!(self, SignTag::SpectrallyNegative | SignTag::Continuous)
    }

    pub fn has_no_negative_jumps(self) -> bool {
        matches!(self, SignTag::SpectrallyPositive | SignTag::Continuous)
    }
}

/// Domain `Θ` on which the Laplace exponent is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentDomain {
    pub theta_min: f64,
    pub theta_max: f64,
    pub min_closed: bool,
    pub max_closed: bool,
}

impl ExponentDomain {
    pub fn contains(&self, theta: f64) -> bool {
        let lo_ok = if self.min_closed { theta >= self.theta_min } else { theta > self.theta_min + POLE_GUARD };
        let hi_ok = if self.max_closed { theta <= self.theta_max } else { theta < self.theta_max - POLE_GUARD };
        lo_ok && hi_ok
    }

    pub fn contains_interior(&self, theta: f64) -> bool {
        theta > self.theta_min + POLE_GUARD && theta < self.theta_max - POLE_GUARD
    }
}

/// `ξ_v`, `η_v = ψ(ξ_v)` and the Höglund rate `γ(v) = ψ*(v)/v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateTriple {
    pub v: f64,
    pub xi_v: f64,
    pub eta_v: f64,
    pub gamma_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    pub drift: f64,
    pub sigma: f64,
    pub jumps_up: Option<JumpComponent>,
    pub jumps_down: Option<JumpComponent>,
}

fn validate_component(c: &JumpComponent, side: &str) -> Result<()> {
    if !(c.intensity >= 0.0 && c.intensity.is_finite()) {
        return Err(Error::InvalidModel(format!("{side} jump intensity must be finite and >= 0")));
    }
    let ok = match c.law {
        JumpLaw::Exponential { rate } => rate > 0.0 && rate.is_finite(),
        JumpLaw::TemperedPareto { alpha } => alpha > 0.0 && alpha.is_finite(),
    };
    if !ok {
        return Err(Error::InvalidModel(format!("{side} jump law parameter must be positive")));
    }
    Ok(())
}

impl LevyModel {
    /// Validated constructor: rejects degenerate and monotone-path models.
    pub fn new(
        drift: f64,
        sigma: f64,
        jumps_up: Option<JumpComponent>,
        jumps_down: Option<JumpComponent>,
    ) -> Result<Self> {
        if !drift.is_finite() || !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidModel("drift must be finite and sigma >= 0".into()));
        }
        if let Some(c) = &jumps_up {
            validate_component(c, "upward")?;
        }
        if let Some(c) = &jumps_down {
            validate_component(c, "downward")?;
        }
        let m = Self {
            drift,
            sigma,
            jumps_up: jumps_up.filter(|c| c.intensity > 0.0),
            jumps_down: jumps_down.filter(|c| c.intensity > 0.0),
        };
        if m.has_monotone_paths() {
            return Err(Error::InvalidModel(
                "model has monotone paths (need sigma > 0 or jumps against the drift)".into(),
            ));
        }
        Ok(m)
    }

    pub fn brownian(drift: f64, sigma: f64) -> Result<Self> {
        Self::new(drift, sigma, None, None)
    }

    /// Kou model: exponential jumps up (`intensity`, `mean`) and down.
    pub fn kou(drift: f64, sigma: f64, up: (f64, f64), down: (f64, f64)) -> Result<Self> {
        Self::new(
            drift,
            sigma,
            Some(JumpComponent::exponential(up.0, up.1)),
            Some(JumpComponent::exponential(down.0, down.1)),
        )
    }

    /// Deterministic line `X_t = drift·t`. Not a valid analytic model; it
    /// exists so samplers can be exercised on degenerate input.
    pub fn deterministic(drift: f64) -> Self {
        Self { drift, sigma: 0.0, jumps_up: None, jumps_down: None }
    }

    pub fn has_monotone_paths(&self) -> bool {
        if self.sigma > 0.0 {
            return false;
        }
        match (&self.jumps_up, &self.jumps_down) {
            (Some(_), Some(_)) => false,
            (Some(_), None) => self.drift >= 0.0,
            (None, Some(_)) => self.drift <= 0.0,
            (None, None) => true,
        }
    }

    pub fn sign_tag(&self) -> SignTag {
        match (self.jumps_up.is_some(), self.jumps_down.is_some()) {
            (false, false) => SignTag::Continuous,
            (false, true) => SignTag::SpectrallyNegative,
            (true, false) => SignTag::SpectrallyPositive,
            (true, true) => SignTag::TwoSided,
        }
    }

    pub fn is_brownian(&self) -> bool {
        self.sign_tag() == SignTag::Continuous
    }

    /// `X̂ = -X`.
    pub fn dual(&self) -> Self {
        Self { drift: -self.drift, sigma: self.sigma, jumps_up: self.jumps_down, jumps_down: self.jumps_up }
    }

    pub fn domain(&self) -> ExponentDomain {
        let (theta_max, max_closed) = self.jumps_up.map_or((f64::INFINITY, false), |c| c.law.mgf_bound());
        let (neg, min_closed) = self.jumps_down.map_or((f64::INFINITY, false), |c| c.law.mgf_bound());
        ExponentDomain { theta_min: -neg, theta_max, min_closed, max_closed }
    }

    fn check_domain(&self, theta: f64) -> Result<ExponentDomain> {
        let d = self.domain();
        if !theta.is_finite() || !d.contains(theta) {
            return Err(Error::Domain { theta, lo: d.theta_min, hi: d.theta_max });
        }
        Ok(d)
    }

    /// `[ψ, ψ', ψ'']` at `theta`.
    fn derivatives(&self, theta: f64) -> [f64; 3] {
        let s2 = self.sigma * self.sigma;
        let mut out = [self.drift * theta + 0.5 * s2 * theta * theta, self.drift + s2 * theta, s2];
        if let Some(c) = &self.jumps_up {
            let m = c.law.mgf(theta);
            out[0] += c.intensity * (m[0] - 1.0);
            out[1] += c.intensity * m[1];
            out[2] += c.intensity * m[2];
        }
        if let Some(c) = &self.jumps_down {
            let m = c.law.mgf(-theta);
            out[0] += c.intensity * (m[0] - 1.0);
            out[1] -= c.intensity * m[1];
            out[2] += c.intensity * m[2];
        }
        out
    }

    /// Laplace exponent `ψ(θ) = log E[e^{θX_1}]`.
    pub fn psi(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(self.derivatives(theta)[0])
    }

    pub fn psi_prime(&self, theta: f64) -> Result<f64> {
        let d = self.check_domain(theta)?;
        if !d.contains_interior(theta) {
            return Err(Error::Domain { theta, lo: d.theta_min, hi: d.theta_max });
        }
        Ok(self.derivatives(theta)[1])
    }

    pub fn psi_second(&self, theta: f64) -> Result<f64> {
        self.psi_prime(theta)?;
        Ok(self.derivatives(theta)[2])
    }

    /// `E[X_1] = ψ'(0)`.
    pub fn mean(&self) -> f64 {
        self.derivatives(0.0)[1]
    }

    /// Analytic continuation of `ψ` for exponential-jump models.
    pub fn psi_complex(&self, s: Complex<f64>) -> Option<Complex<f64>> {
        let mut out = s * self.drift + s * s * (0.5 * self.sigma * self.sigma);
        if let Some(c) = &self.jumps_up {
            let JumpLaw::Exponential { rate } = c.law else { return None };
            out += (Complex::from(rate) / (rate - s) - 1.0) * c.intensity;
        }
        if let Some(c) = &self.jumps_down {
            let JumpLaw::Exponential { rate } = c.law else { return None };
            out += (Complex::from(rate) / (rate + s) - 1.0) * c.intensity;
        }
        Some(out)
    }

    /// Minimiser of `ψ` over the domain (0 is returned when `ψ'(0) = 0`).
    pub fn argmin(&self) -> Result<f64> {
        let mean = self.mean();
        if mean == 0.0 {
            return Ok(0.0);
        }
        let d = self.domain();
        let dir = if mean < 0.0 { 1.0 } else { -1.0 };
        let edge = if dir > 0.0 { d.theta_max } else { d.theta_min };
        let far = self.expand_until(0.0, dir, edge, |th| dir * self.derivatives(th)[1] > 0.0)?;
        match far {
            Some(far) => newton_bisect(
                |th| {
                    let v = self.derivatives(th);
                    (v[1], v[2])
                },
                0.0f64.min(far),
                0.0f64.max(far),
                ROOT_TOL,
            ),
            // ψ' keeps its sign up to a closed domain end: the minimum sits on the boundary
            None => Ok(edge),
        }
    }

    /// Walks from `start` in direction `dir` with geometrically growing
    /// steps until `stop` holds. Stops short of the domain `edge`; returns
    /// `None` if the closed edge is reached without `stop` holding.
    fn expand_until<F: Fn(f64) -> bool>(&self, start: f64, dir: f64, edge: f64, stop: F) -> Result<Option<f64>> {
        let d = self.domain();
        let closed = if dir > 0.0 { d.max_closed } else { d.min_closed };
        let mut step = 1.0;
        let mut th = start;
        for _ in 0..200 {
            let mut next = th + dir * step;
            if edge.is_finite() && dir * (next - edge) >= 0.0 {
                if closed {
                    next = edge;
                    return Ok(if stop(next) { Some(next) } else { None });
                }
                // approach an open (pole) edge geometrically
                next = th + 0.5 * (edge - th);
                if (edge - next).abs() < 2.0 * POLE_GUARD {
                    next = edge - dir * 2.0 * POLE_GUARD;
                    return Ok(if stop(next) { Some(next) } else { None });
                }
            }
            if stop(next) {
                return Ok(Some(next));
            }
            th = next;
            step *= 2.0;
        }
        Err(Error::Convergence("bracket expansion exceeded 200 steps".into()))
    }

    /// `Φ(q)`: largest root of `ψ(θ) = q`.
    pub fn phi(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(Error::DomainMsg(format!("phi requires q >= 0, got {q}")));
        }
        let lo = self.argmin()?.max(0.0);
        if q == 0.0 && self.mean() >= 0.0 {
            return Ok(0.0);
        }
        let d = self.domain();
        let hi = self
            .expand_until(lo, 1.0, d.theta_max, |th| self.derivatives(th)[0] > q)?
            .ok_or_else(|| Error::Convergence(format!("psi stays below {q} on the domain")))?;
        newton_bisect(
            |th| {
                let v = self.derivatives(th);
                (v[0] - q, v[1])
            },
            lo,
            hi,
            ROOT_TOL,
        )
    }

    /// `Φ'(q) = 1 / ψ'(Φ(q))`.
    pub fn phi_prime(&self, q: f64) -> Result<f64> {
        let p = self.phi(q)?;
        Ok(1.0 / self.derivatives(p)[1])
    }

    /// Cramér root `γ > 0` with `ψ(γ) = 0`; requires `E[X_1] < 0`.
    pub fn cramer_gamma(&self) -> Result<f64> {
        if !(self.mean() < 0.0) {
            return Err(Error::NoCramerRoot);
        }
        let lo = self.argmin()?;
        let d = self.domain();
        let hi = self.expand_until(lo, 1.0, d.theta_max, |th| self.derivatives(th)[0] > 0.0)?;
        let Some(hi) = hi else { return Err(Error::NoCramerRoot) };
        newton_bisect(
            |th| {
                let v = self.derivatives(th);
                (v[0], v[1])
            },
            lo,
            hi,
            ROOT_TOL,
        )
    }

    /// Range of `ψ'` over the interior of the domain.
    pub fn psi_prime_range(&self) -> (f64, f64) {
        let d = self.domain();
        let end = |edge: f64, closed: bool, dir: f64| -> f64 {
            if !edge.is_finite() {
                return dir * f64::INFINITY;
            }
            if !closed {
                return dir * f64::INFINITY;
            }
            self.derivatives(edge - dir * 1e-12)[1]
        };
        let lo = if self.sigma > 0.0 { f64::NEG_INFINITY } else { end(d.theta_min, d.min_closed, -1.0) };
        let hi = if self.sigma > 0.0 { f64::INFINITY } else { end(d.theta_max, d.max_closed, 1.0) };
        (lo, hi)
    }

    /// Solves `ψ'(ξ_v) = v` and assembles the convex-conjugate quantities.
    pub fn conjugate(&self, v: f64) -> Result<ConjugateTriple> {
        let (lo_range, hi_range) = self.psi_prime_range();
        let infeasible = || Error::InfeasibleProportion { v, lo: lo_range, hi: hi_range };
        if !(v > 0.0) || !(v > lo_range && v < hi_range) {
            return Err(infeasible());
        }
        let d = self.domain();
        let dir = if self.mean() < v { 1.0 } else { -1.0 };
        let edge = if dir > 0.0 { d.theta_max } else { d.theta_min };
        let far = self
            .expand_until(0.0, dir, edge, |th| dir * (self.derivatives(th)[1] - v) > 0.0)?
            .ok_or_else(infeasible)?;
        let xi = newton_bisect(
            |th| {
                let w = self.derivatives(th);
                (w[1] - v, w[2])
            },
            0.0f64.min(far),
            0.0f64.max(far),
            ROOT_TOL,
        )?;
        if !d.contains_interior(xi) {
            return Err(infeasible());
        }
        let eta = self.derivatives(xi)[0];
        Ok(ConjugateTriple { v, xi_v: xi, eta_v: eta, gamma_v: (xi * v - eta) / v })
    }

    /// Requires no positive jumps; BM qualifies.
    pub fn require_spectrally_negative(&self, what: &str) -> Result<()> {
        if self.sign_tag().has_no_positive_jumps() {
            Ok(())
        } else {
            Err(Error::UnsupportedModel(format!("{what} requires a model without positive jumps")))
        }
    }

    pub fn require_one_sided(&self, what: &str) -> Result<()> {
        if self.sign_tag() == SignTag::TwoSided {
            Err(Error::UnsupportedModel(format!("{what} is not implemented for two-sided jumps")))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::roots::bisect;
    use proptest::prelude::*;

    fn bm() -> LevyModel {
        LevyModel::brownian(-0.5, 1.0).unwrap()
    }

    fn kou() -> LevyModel {
        LevyModel::kou(-0.3, 0.4, (1.0, 0.2), (2.0, 0.25)).unwrap()
    }

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-5 * (1.0 + x.abs());
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn jump_survival_and_density_agree() {
        for law in [
            JumpLaw::Exponential { rate: 2.0 },
            JumpLaw::TemperedPareto { alpha: 0.7 },
            JumpLaw::TemperedPareto { alpha: 0.0 },
        ] {
            for u in [0.0f64, 0.3, 2.0, 15.0] {
                let direct = match law {
                    // untempered: P(J > u) = (1+u)^{-1/2}
                    JumpLaw::TemperedPareto { alpha: 0.0 } => (1.0 + u).powf(-0.5),
                    _ => {
                        crate::numeric::quad::integrate_to_inf(|x| law.density(x), u, QuadOpts::with_tol(1e-300, 1e-11))
                            .unwrap()
                    }
                };
                let s = law.survival(u);
                assert!((s - direct).abs() < 1e-9 * s.max(1e-3), "{law:?} u={u}: {s} {direct}");
                assert!((law.tail_integral(u, |_| 1.0) - s).abs() < 1e-10 * s.max(1e-3));
            }
        }
        // E[(J − u)⁺] for the exponential law is e^{-ru}/r
        let law = JumpLaw::Exponential { rate: 2.0 };
        assert!((law.tail_integral(1.0, |w| w) - (-2.0f64).exp() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(bm().psi(1.0).unwrap(), 0.0);
        assert_eq!(bm().psi(2.0).unwrap(), 1.0);
        assert_eq!(kou().psi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn psi_domain_errors() {
        let m = kou();
        assert!(matches!(m.psi(5.0), Err(Error::Domain { .. })));
        assert!(matches!(m.psi(-4.0), Err(Error::Domain { .. })));
        assert!(matches!(m.psi(5.0 - 1e-10), Err(Error::Domain { .. })));
        assert!(m.psi(4.99).is_ok());
    }

    #[test]
    fn psi_prime_examples() {
        assert_eq!(bm().psi_prime(0.0).unwrap(), -0.5);
        assert_eq!(bm().psi_prime(1.0).unwrap(), 0.5);
        let m = kou();
        for th in [-3.5, -1.0, 0.0, 0.7, 2.0, 4.0] {
            let a = m.psi_prime(th).unwrap();
            let n = fd(|x| m.psi(x).unwrap(), th);
            assert!(((a - n) / a.abs().max(1.0)).abs() < 1e-7, "{th}: {a} vs {n}");
        }
    }

    #[test]
    fn phi_examples() {
        assert!((bm().phi(0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((bm().phi(1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(LevyModel::brownian(0.5, 1.0).unwrap().phi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn cramer_examples() {
        assert!((bm().cramer_gamma().unwrap() - 1.0).abs() < 1e-14);
        assert!((LevyModel::brownian(-1.0, 2.0).unwrap().cramer_gamma().unwrap() - 0.5).abs() < 1e-14);
        let m = kou();
        let g = m.cramer_gamma().unwrap();
        let lo = m.argmin().unwrap();
        let oracle = bisect(|th| m.psi(th).unwrap(), lo, 5.0 - 1e-6, 1e-14).unwrap();
        assert!((g - oracle).abs() < 1e-10);
        assert!(m.psi(g).unwrap().abs() < 1e-12);
        assert!(matches!(LevyModel::brownian(0.2, 1.0).unwrap().cramer_gamma(), Err(Error::NoCramerRoot)));
    }

    #[test]
    fn heavy_model_has_no_cramer_root() {
        // ψ(α) < 0 at the closed right end
        let m = LevyModel::new(-1.0, 0.3, Some(JumpComponent::tempered_pareto(0.2, 1.0)), None).unwrap();
        assert!(m.psi(1.0).unwrap() < 0.0);
        assert!(matches!(m.cramer_gamma(), Err(Error::NoCramerRoot)));
    }

    #[test]
    fn conjugate_examples() {
        let c = bm().conjugate(1.5).unwrap();
        assert!((c.xi_v - 2.0).abs() < 1e-13);
        assert!((c.eta_v - 1.0).abs() < 1e-13);
        assert!((c.gamma_v - 4.0 / 3.0).abs() < 1e-13);
        let c = bm().conjugate(0.5).unwrap();
        assert!((c.gamma_v - 1.0).abs() < 1e-13);
        let m = kou();
        let c = m.conjugate(0.8).unwrap();
        let slope = fd(|x| m.psi(x).unwrap(), c.xi_v);
        assert!((slope - 0.8).abs() < 1e-7);
    }

    #[test]
    fn infeasible_proportion() {
        // σ = 0 with bounded-above jump mgf: ψ' is bounded on the left
        let m = LevyModel::new(-1.0, 0.0, Some(JumpComponent::tempered_pareto(2.0, 1.0)), None).unwrap();
        assert!(matches!(m.conjugate(-0.5), Err(Error::InfeasibleProportion { .. })));
    }

    #[test]
    fn dual_examples() {
        let k = kou();
        let d = k.dual();
        assert_eq!(d.dual(), k);
        assert_eq!(d.jumps_up, k.jumps_down);
        assert_eq!(LevyModel::brownian(0.3, 1.0).unwrap().dual().drift, -0.3);
        let sn = LevyModel::new(0.1, 1.0, None, Some(JumpComponent::exponential(1.0, 0.5))).unwrap();
        assert_eq!(sn.sign_tag(), SignTag::SpectrallyNegative);
        assert_eq!(sn.dual().sign_tag(), SignTag::SpectrallyPositive);
    }

    #[test]
    fn monotone_models_rejected() {
        assert!(LevyModel::brownian(1.0, 0.0).is_err());
        assert!(LevyModel::new(1.0, 0.0, Some(JumpComponent::exponential(1.0, 1.0)), None).is_err());
        assert!(LevyModel::new(1.0, 0.0, None, Some(JumpComponent::exponential(1.0, 1.0))).is_ok());
    }

    #[test]
    fn complex_psi_agrees_on_real_axis() {
        let m = kou();
        for th in [-2.0, 0.3, 3.0] {
            let z = m.psi_complex(Complex::new(th, 0.0)).unwrap();
            assert!((z.re - m.psi(th).unwrap()).abs() < 1e-13);
        }
    }

    fn catalogue() -> Vec<LevyModel> {
        vec![
            bm(),
            LevyModel::brownian(0.7, 1.3).unwrap(),
            kou(),
            kou().dual(),
            LevyModel::new(0.4, 0.5, None, Some(JumpComponent::exponential(1.5, 0.5))).unwrap(),
            LevyModel::new(-0.4, 0.5, Some(JumpComponent::exponential(1.5, 0.2)), None).unwrap(),
            LevyModel::new(1.0, 0.0, None, Some(JumpComponent::exponential(1.0, 0.5))).unwrap(),
        ]
    }

    #[test]
    fn phi_inverts_psi_on_grid() {
        for m in catalogue() {
            for i in 0..=20 {
                let q = 0.5 * i as f64;
                let p = m.phi(q).unwrap();
                assert!((m.psi(p).unwrap() - q).abs() < 1e-10 * (1.0 + q), "{m:?} q={q}");
                assert!(p >= m.phi(0.0).unwrap());
            }
        }
    }

    #[test]
    fn cramer_matches_phi_at_zero() {
        for m in catalogue().into_iter().filter(|m| m.mean() < 0.0) {
            assert!((m.cramer_gamma().unwrap() - m.phi(0.0).unwrap()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn psi_is_convex(a in -3.0f64..4.5, b in -3.0f64..4.5, w in 0.0f64..1.0) {
            let m = kou();
            let lhs = m.psi(w * a + (1.0 - w) * b).unwrap();
            let rhs = w * m.psi(a).unwrap() + (1.0 - w) * m.psi(b).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn dual_reflects_exponent(th in -4.5f64..3.5) {
            let m = kou();
            prop_assert!((m.dual().psi(th).unwrap() - m.psi(-th).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn conjugate_rate_dominates_cramer(v in 0.05f64..5.0) {
            let m = kou();
            let c = m.conjugate(v).unwrap();
            prop_assert!((m.psi_prime(c.xi_v).unwrap() - v).abs() < 1e-10);
            // ψ*(v) >= γv with equality at v = ψ'(γ)
            let g = m.cramer_gamma().unwrap();
            prop_assert!(c.gamma_v >= g - 1e-10);
            if c.eta_v >= 0.0 {
                prop_assert!(c.gamma_v <= c.xi_v + 1e-12);
            }
        }
    }
}
