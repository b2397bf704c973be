//! Scale functions of spectrally negative models.
//!
//! `W^(q)` is characterised by `∫_0^∞ e^{-λx} W^(q)(x) dx = 1 / (ψ(λ) - q)` for
//! `λ > Φ(q)`. For Brownian motion with (optionally) one exponential
//! downward jump component the transform is rational, and `W^(q)` is the
//! finite exponential sum `Σ e^{r_i x} / ψ'(r_i)` over the real roots `r_i`
//! of `ψ(θ) = q` (ψ continued through its pole at `-α`). Every other
//! spectrally negative model goes through numerical Laplace inversion.

use num::Complex;

use crate::error::{Error, Result};
use crate::model::{JumpLaw, LevyModel};
use crate::numeric::laplace::{self, Complex64, ComplexTransform, RealTransform, DEFAULT_TERMS};
use crate::numeric::quad::{integrate, QuadOpts};
use crate::numeric::roots::newton_bisect;

const COMPLEX_TOL: f64 = 1e-9;
/// Gaver–Stehfest on a real transform resolves four to five digits in double
/// precision.
const REAL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMethod {
    ClosedForm,
    LaplaceInversion,
}

/// `Σ_i coeff_i · e^{root_i x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    pub terms: Vec<(f64, f64)>,
}

impl ExpSum {
    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(a, r)| a * (r * x).exp()).sum()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(a, r)| a * r * (r * x).exp()).sum()
    }

    /// `∫_0^x` of the sum.
    pub fn integral(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(a, r)| if r == 0.0 { a * x } else { a * (r * x).exp_m1() / r }).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ScaleEvaluator {
    pub model: LevyModel,
    pub q: f64,
    pub method: ScaleMethod,
    phi_q: f64,
    exp_sum: Option<ExpSum>,
    terms: usize,
    /// Overrides the inversion tolerance.
    tol: Option<f64>,
}

/// `(ψ, ψ')` on the real line, continued through the pole of an exponential
/// downward jump component.
fn rational_psi(m: &LevyModel, rate: f64, intensity: f64, th: f64) -> (f64, f64) {
    let s2 = m.sigma * m.sigma;
    let d = rate + th;
    (m.drift * th + 0.5 * s2 * th * th + intensity * (rate / d - 1.0), m.drift + s2 * th - intensity * rate / (d * d))
}

fn closed_form(model: &LevyModel, q: f64, phi_q: f64) -> Result<ExpSum> {
    let (a, s2) = (model.drift, model.sigma * model.sigma);
    let Some(jc) = model.jumps_down else {
        let omega = a / s2;
        let delta = (a * a + 2.0 * s2 * q).sqrt() / s2;
        if delta == 0.0 {
            return Err(Error::Convergence("double root of psi(theta) = q".into()));
        }
        let c = 1.0 / (delta * s2);
        return Ok(ExpSum { terms: vec![(c, -omega + delta), (-c, -omega - delta)] });
    };
    let JumpLaw::Exponential { rate } = jc.law else {
        return Err(Error::UnsupportedModel("closed form needs exponential jumps".into()));
    };
    let lam = jc.intensity;
    let f = |th: f64| {
        let (v, d) = rational_psi(model, rate, lam, th);
        (v - q, d)
    };
    let mut roots = vec![phi_q];
    // middle root between the pole and the minimiser
    let pole_side = -rate + 1e-12 * rate.max(1.0);
    let argmin = model.argmin()?;
    if f(argmin).0 < 0.0 {
        roots.push(newton_bisect(f, pole_side, argmin, 1e-15)?);
    } else {
        return Err(Error::Convergence("double root of psi(theta) = q".into()));
    }
    if s2 > 0.0 {
        let right = -rate - 1e-12 * rate.max(1.0);
        let mut left = -rate - 1.0;
        let mut step = 1.0;
        while f(left).0 <= 0.0 {
            step *= 2.0;
            left = -rate - step;
            if step > 1e12 {
                return Err(Error::Convergence("left root bracket".into()));
            }
        }
        roots.push(newton_bisect(f, left, right, 1e-15)?);
    }
    for i in 0..roots.len() {
        for j in 0..i {
            if (roots[i] - roots[j]).abs() < 1e-9 * (1.0 + roots[i].abs()) {
                return Err(Error::Convergence("double root of psi(theta) = q".into()));
            }
        }
    }
    Ok(ExpSum { terms: roots.into_iter().map(|r| (1.0 / f(r).1, r)).collect() })
}

impl ScaleEvaluator {
    /// Closed form where available, numerical inversion otherwise.
    pub fn new(model: &LevyModel, q: f64) -> Result<Self> {
        model.require_spectrally_negative("scale functions")?;
        Self::with_method(model, q, ScaleMethod::ClosedForm)
            .or_else(|_| Self::with_method(model, q, ScaleMethod::LaplaceInversion))
    }

    pub fn with_method(model: &LevyModel, q: f64, method: ScaleMethod) -> Result<Self> {
        model.require_spectrally_negative("scale functions")?;
        if !(q >= 0.0) {
            return Err(Error::DomainMsg(format!("scale functions need q >= 0, got {q}")));
        }
        let phi_q = model.phi(q)?;
        let exp_sum = match method {
            ScaleMethod::ClosedForm => Some(closed_form(model, q, phi_q)?),
            ScaleMethod::LaplaceInversion => None,
        };
        Ok(Self { model: *model, q, method, phi_q, exp_sum, terms: DEFAULT_TERMS, tol: None })
    }

    /// Gaver–Stehfest term count used by the inversion method.
    pub fn with_terms(mut self, terms: usize) -> Self {
        self.terms = terms;
        self
    }

    /// Accepted relative error estimate of the inversion method.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn phi_q(&self) -> f64 {
        self.phi_q
    }

    pub fn exp_sum(&self) -> Option<&ExpSum> {
        self.exp_sum.as_ref()
    }

    /// `1 / (ψ(λ) - q)`.
    pub fn transform(&self, lambda: f64) -> Result<f64> {
        Ok(1.0 / (self.model.psi(lambda)? - self.q))
    }

    fn invert(&self, x: f64) -> Result<f64> {
        let q = self.q;
        let shift = self.phi_q;
        let model = self.model;
        // a complex-capable transform can afford a tolerance that forces the
        // contour route whenever Gaver–Stehfest alone is not that accurate
        if model.psi_complex(Complex::new(1.0, 0.0)).is_some() {
            let f = ComplexTransform(move |s: Complex64| 1.0 / (model.psi_complex(s).expect("rational") - q));
            laplace::laplace_invert_shifted_tol(&f, x, shift, self.terms, self.tol.unwrap_or(COMPLEX_TOL))
        } else {
            let f = RealTransform(move |s: f64| model.psi(s).map_or(f64::NAN, |p| 1.0 / (p - q)));
            laplace::laplace_invert_shifted_tol(&f, x, shift, self.terms, self.tol.unwrap_or(REAL_TOL))
        }
    }

    pub fn w_q(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::DomainMsg(format!("scale function argument must be >= 0, got {x}")));
        }
        match &self.exp_sum {
            Some(e) => Ok(e.eval(x)),
            None if x == 0.0 => self.w_zero(),
            None => self.invert(x),
        }
    }

    /// `W^(q)(0+)`: `1/drift` for bounded variation, 0 otherwise.
    pub fn w_zero(&self) -> Result<f64> {
        if let Some(e) = &self.exp_sum {
            return Ok(e.eval(0.0));
        }
        if self.model.sigma > 0.0 {
            return Ok(0.0);
        }
        Ok(1.0 / self.model.drift)
    }

    pub fn z_q(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::DomainMsg(format!("scale function argument must be >= 0, got {x}")));
        }
        if self.q == 0.0 || x == 0.0 {
            return Ok(1.0);
        }
        match &self.exp_sum {
            Some(e) => Ok(1.0 + self.q * e.integral(x)),
            None => {
                let opts = QuadOpts::with_tol(1e-12, 1e-9);
                let w = |y: f64| self.w_q(y).unwrap_or(f64::NAN);
                Ok(1.0 + self.q * integrate(w, 0.0, x, opts)?)
            }
        }
    }

    /// Right derivative `W^(q)'_+(x)`.
    pub fn w_q_deriv_plus(&self, x: f64) -> Result<f64> {
        if let Some(e) = &self.exp_sum {
            if x >= 0.0 {
                return Ok(e.deriv(x));
            }
        }
        if !(x > 0.0) {
            return Err(Error::DomainMsg(format!("right derivative needs x > 0, got {x}")));
        }
        // forward differences, three Richardson levels
        let h = 0.02 * x.min(1.0);
        let w0 = self.w_q(x)?;
        let mut d = Vec::with_capacity(3);
        for k in 0..3 {
            let hk = h / f64::from(1 << k);
            d.push((self.w_q(x + hk)? - w0) / hk);
        }
        let r1 = [2.0 * d[1] - d[0], 2.0 * d[2] - d[1]];
        Ok((4.0 * r1[1] - r1[0]) / 3.0)
    }

    /// Density of the q-resolvent of the process reflected at its supremum,
    /// killed on exiting `[0, x]`.
    pub fn resolvent_sup(&self, x: f64, y: f64) -> Result<f64> {
        if !(0.0..=x).contains(&y) {
            return Err(Error::DomainMsg(format!("resolvent point {y} outside [0, {x}]")));
        }
        Ok(self.w_q(x - y)? / self.z_q(x)?)
    }

    /// q-resolvent measure of the process reflected at its infimum.
    pub fn resolvent_inf(&self, x: f64) -> Result<ResolventDensity> {
        if !(x > 0.0) {
            return Err(Error::DomainMsg(format!("resolvent barrier must be > 0, got {x}")));
        }
        let wx = self.w_q(x)?;
        let wpx = self.w_q_deriv_plus(x)?;
        Ok(ResolventDensity {
            barrier: x,
            kind: ResolventKind::InfReflected,
            atom: self.w_zero()? * wx / wpx,
            ratio: wx / wpx,
            ev: self.clone(),
        })
    }

    pub fn resolvent_sup_measure(&self, x: f64) -> Result<ResolventDensity> {
        if !(x > 0.0) {
            return Err(Error::DomainMsg(format!("resolvent barrier must be > 0, got {x}")));
        }
        Ok(ResolventDensity {
            barrier: x,
            kind: ResolventKind::SupReflected,
            atom: 0.0,
            ratio: 1.0 / self.z_q(x)?,
            ev: self.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventKind {
    SupReflected,
    InfReflected,
}

/// Resolvent measure on `[0, barrier]`: an atom at 0 plus a density.
#[derive(Debug, Clone)]
pub struct ResolventDensity {
    pub barrier: f64,
    pub kind: ResolventKind,
    pub atom: f64,
    ratio: f64,
    ev: ScaleEvaluator,
}

impl ResolventDensity {
    pub fn density(&self, y: f64) -> Result<f64> {
        if !(0.0..=self.barrier).contains(&y) {
            return Err(Error::DomainMsg(format!("resolvent point {y} outside [0, {}]", self.barrier)));
        }
        match self.kind {
            ResolventKind::SupReflected => Ok(self.ev.w_q(self.barrier - y)? * self.ratio),
            ResolventKind::InfReflected => {
                let wp = if y > 0.0 { self.ev.w_q_deriv_plus(y)? } else { self.ev.w_q_deriv_plus(1e-12)? };
                Ok(self.ratio * wp - self.ev.w_q(y)?)
            }
        }
    }

    /// Measure of `[0, y]`.
    pub fn cumulative(&self, y: f64) -> Result<f64> {
        let y = y.clamp(0.0, self.barrier);
        let ev = &self.ev;
        match self.kind {
            ResolventKind::SupReflected => {
                let z = ev.z_q(self.barrier)? - ev.z_q(self.barrier - y)?;
                Ok(if ev.q > 0.0 {
                    z * self.ratio / ev.q
                } else {
                    let opts = QuadOpts::with_tol(1e-12, 1e-10);
                    integrate(|u| ev.w_q(u).unwrap_or(f64::NAN), self.barrier - y, self.barrier, opts)? * self.ratio
                })
            }
            ResolventKind::InfReflected => {
                let wy = ev.w_q(y)?;
                let int_w = if ev.q > 0.0 {
                    (ev.z_q(y)? - 1.0) / ev.q
                } else {
                    let opts = QuadOpts::with_tol(1e-12, 1e-10);
                    integrate(|u| ev.w_q(u).unwrap_or(f64::NAN), 0.0, y, opts)?
                };
                Ok(self.ratio * wy - int_w)
            }
        }
    }
}
