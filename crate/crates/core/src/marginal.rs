//! One-dimensional laws: expectations over `X_s` and the running extrema of
//! drifted Brownian motion.
//!
//! For one-sided exponential jumps, `X_s = a s + σ W_s + ε G` where `G` is a
//! Poisson(λs) sum of Exp(α) variables. Gaussian kernels are integrated in
//! closed form; the jump sum enters through its (defective) density
//! `Σ_{n≥1} P(N = n) Gamma(n, α)(g)` plus the atom at `g = 0`.

use libm::erfc;

use crate::error::{Error, Result};
use crate::model::{JumpLaw, LevyModel};
use crate::numeric::quad::{integrate, integrate_to_inf, QuadOpts};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// `ln Φ(z)`, accurate in the far left tail.
pub fn ln_norm_cdf(z: f64) -> f64 {
    if z > -30.0 {
        return norm_cdf(z).ln();
    }
    let z2 = z * z;
    -0.5 * z2 - (-z * SQRT_2PI).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
}

/// Functions `h` for which `E[h(Y)]`, `Y ~ N(m, v)`, is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `y⁺`
    PositivePart,
    /// `y⁻ = max(-y, 0)`
    NegativePart,
    /// `e^{cy} y⁺`
    ExpPositivePart(f64),
}

impl Kernel {
    fn at_point(self, y: f64) -> f64 {
        match self {
            Kernel::PositivePart => y.max(0.0),
            Kernel::NegativePart => (-y).max(0.0),
            Kernel::ExpPositivePart(c) => {
                if y > 0.0 {
                    (c * y).exp() * y
                } else {
                    0.0
                }
            }
        }
    }

    /// `E[h(Y)]` for `Y ~ N(m, v)`.
    pub fn gaussian(self, m: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return self.at_point(m);
        }
        let sd = v.sqrt();
        let pos = |m: f64| m * norm_cdf(m / sd) + sd * norm_pdf(m / sd);
        match self {
            Kernel::PositivePart => pos(m),
            Kernel::NegativePart => pos(-m),
            Kernel::ExpPositivePart(c) => (c * m + 0.5 * c * c * v).exp() * pos(m + c * v),
        }
    }
}

/// `E[h(X_s)]` for Brownian motion with at most one exponential jump side.
pub fn expect(model: &LevyModel, s: f64, kernel: Kernel) -> Result<f64> {
    if s <= 0.0 {
        return Ok(kernel.at_point(0.0));
    }
    model.require_one_sided("marginal expectation")?;
    let m0 = model.drift * s;
    let var = model.sigma * model.sigma * s;
    let (eps, comp) = match (model.jumps_up, model.jumps_down) {
        (Some(c), None) => (1.0, c),
        (None, Some(c)) => (-1.0, c),
        _ => return Ok(kernel.gaussian(m0, var)),
    };
    let JumpLaw::Exponential { rate } = comp.law else {
        return Err(Error::UnsupportedModel("marginal expectation needs exponential jumps".into()));
    };
    let ls = comp.intensity * s;
    let atom = (-ls).exp() * kernel.gaussian(m0, var);
    let opts = QuadOpts::with_tol(1e-14, 1e-11);
    let jump_part = integrate_to_inf(
        |g| {
            let d = jump_sum_density(ls, rate, g);
            if d == 0.0 {
                0.0
            } else {
                d * kernel.gaussian(m0 + eps * g, var)
            }
        },
        0.0,
        opts,
    )?;
    Ok(atom + jump_part)
}

/// Absolutely continuous part of the compound-Poisson sum density at `g > 0`.
fn jump_sum_density(ls: f64, rate: f64, g: f64) -> f64 {
    if g <= 0.0 || ls <= 0.0 {
        return 0.0;
    }
    let z = ls * rate * g;
    // log of the n = 1 term, then the ratio recurrence term_{n+1}/term_n = z / (n (n+1))
    let mut ln_term = -ls - rate * g + (ls * rate).ln();
    let mut term = ln_term.exp();
    let mut sum = term;
    let mut n = 1.0f64;
    loop {
        ln_term += (z / (n * (n + 1.0))).ln();
        term = ln_term.exp();
        sum += term;
        n += 1.0;
        // past the mode and negligible
        if n * (n + 1.0) > z && term <= 1e-17 * sum {
            break;
        }
        if n > 1e6 {
            break;
        }
    }
    sum
}

/// `P(sup_{s≤t} (a s + σ W_s) > m)` for `m ≥ 0`.
pub fn bm_max_survival(a: f64, sigma: f64, t: f64, m: f64) -> f64 {
    if m <= 0.0 {
        return 1.0;
    }
    if t <= 0.0 {
        return 0.0;
    }
    let sd = sigma * t.sqrt();
    let below = norm_cdf((m - a * t) / sd);
    let reflected = (2.0 * a * m / (sigma * sigma) + ln_norm_cdf((-m - a * t) / sd)).exp();
    (1.0 - below + reflected).clamp(0.0, 1.0)
}

/// `ln P(sup_{s≤t} (a s + σ W_s) > m)` for `m > 0`, `t > 0`.
fn bm_max_ln_survival(a: f64, sigma: f64, t: f64, m: f64) -> f64 {
    let sd = sigma * t.sqrt();
    let above = ln_norm_cdf((a * t - m) / sd);
    let reflected = 2.0 * a * m / (sigma * sigma) + ln_norm_cdf((-m - a * t) / sd);
    let hi = above.max(reflected);
    hi + ((above - hi).exp() + (reflected - hi).exp()).ln()
}

/// `E[e^{c M_t}]` for the running maximum `M_t` of drifted Brownian motion,
/// by quadrature of `1 + c ∫_0^∞ e^{cm} P(M_t > m) dm`.
pub fn bm_max_exp_moment(a: f64, sigma: f64, t: f64, c: f64) -> Result<f64> {
    if c == 0.0 || t <= 0.0 {
        return Ok(1.0);
    }
    let opts = QuadOpts::with_tol(1e-15, 1e-12);
    let f = |m: f64| if m <= 0.0 { 1.0 } else { (c * m + bm_max_ln_survival(a, sigma, t, m)).exp() };
    // the integrand is a Gaussian tail beyond a few standard deviations
    let scale = a.abs() * t + 10.0 * sigma * t.sqrt() + (c.abs() * sigma * sigma * t);
    let body = integrate(f, 0.0, scale, opts)?;
    let tail = integrate_to_inf(f, scale, opts)?;
    Ok(1.0 + c * (body + tail))
}

/// `E[M_t]` for drifted Brownian motion.
pub fn bm_max_mean(a: f64, sigma: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOpts::with_tol(1e-15, 1e-12);
    let f = |m: f64| bm_max_survival(a, sigma, t, m);
    let scale = a.abs() * t + 10.0 * sigma * t.sqrt();
    Ok(integrate(f, 0.0, scale, opts)? + integrate_to_inf(f, scale, opts)?)
}
