//! Numerical Laplace inversion.
//!
//! Two routes are provided:
//!
//! * Gaver–Stehfest on the real axis. The weights are formed in exact
//!   rational arithmetic and the weighted sum is compensated, since the
//!   alternating weights grow like `10^{N/2}` and cancel catastrophically.
//! * Abate–Whitt Euler summation of the Bromwich integral on a vertical line
//!   in the complex plane. Needs a complex-capable transform.
//!
//! [`laplace_invert`] runs Gaver–Stehfest first and falls back to the Euler
//! route when the Stehfest cancellation estimate exceeds the tolerance.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Complex, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::stats::compensated_sum;

pub type Complex64 = Complex<f64>;

pub const DEFAULT_TERMS: usize = 16;
pub const DEFAULT_TOL: f64 = 1e-6;

/// A Laplace transform `F(s) = ∫_0^∞ e^{-st} f(t) dt`.
pub trait Transform {
    fn at(&self, s: f64) -> f64;

    /// Evaluation off the real axis; `None` when only real arguments are supported.
    fn at_complex(&self, _s: Complex64) -> Option<Complex64> {
        None
    }
}

/// Transform known only on the real half-line.
pub struct RealTransform<F>(pub F);

impl<F: Fn(f64) -> f64> Transform for RealTransform<F> {
    fn at(&self, s: f64) -> f64 {
        (self.0)(s)
    }
}

/// Transform with an analytic continuation to complex arguments.
pub struct ComplexTransform<F>(pub F);

impl<F: Fn(Complex64) -> Complex64> Transform for ComplexTransform<F> {
    fn at(&self, s: f64) -> f64 {
        (self.0)(Complex64::new(s, 0.0)).re
    }
    fn at_complex(&self, s: Complex64) -> Option<Complex64> {
        Some((self.0)(s))
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Stehfest weights `V_k`, `k = 1..=n`, for even `n`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    assert!(n >= 2 && n.is_multiple_of(2), "Stehfest term count must be even");
    let half = (n / 2) as u64;
    (1..=n as u64)
        .map(|k| {
            let mut acc = BigRational::zero();
            let lo = k.div_ceil(2);
            let hi = k.min(half);
            for j in lo..=hi {
                let num = BigInt::from(j).pow(half as u32) * factorial(2 * j);
                let den =
                    factorial(half - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k);
                acc += BigRational::new(num, den);
            }
            let sign = if (k + half).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * acc.to_f64().expect("Stehfest weight fits in f64")
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct StehfestEstimate {
    pub value: f64,
    /// Rounding error carried through the alternating sum.
    pub cancellation: f64,
    /// Geometric extrapolation of the differences against the `n - 2` and
    /// `n - 4` term approximations.
    pub truncation: f64,
}

impl StehfestEstimate {
    pub fn error(&self) -> f64 {
        self.cancellation + self.truncation
    }
}

fn stehfest_sum<T: Transform + ?Sized>(f: &T, t: f64, n: usize) -> (f64, f64) {
    let ln2t = std::f64::consts::LN_2 / t;
    let weights = stehfest_weights(n);
    let terms: Vec<f64> = weights.iter().enumerate().map(|(i, w)| w * f.at((i + 1) as f64 * ln2t)).collect();
    let abs_mass = compensated_sum(terms.iter().map(|v| v.abs()));
    (ln2t * compensated_sum(terms), ln2t * abs_mass)
}

/// Gaver–Stehfest inversion with `n` terms.
pub fn gaver_stehfest<T: Transform + ?Sized>(f: &T, t: f64, n: usize) -> StehfestEstimate {
    let (value, abs_mass) = stehfest_sum(f, t, n);
    let (prev, _) = stehfest_sum(f, t, n - 2);
    let d1 = (value - prev).abs();
    let truncation = if n >= 6 {
        let (prev2, _) = stehfest_sum(f, t, n - 4);
        let d2 = (prev - prev2).abs();
        if d1 < d2 {
            d1 * d1 / d2
        } else {
            d1
        }
    } else {
        d1
    };
    StehfestEstimate { value, cancellation: abs_mass * 4.0 * f64::EPSILON, truncation }
}

fn binomial_row(m: usize) -> Vec<f64> {
    let mut row = vec![1.0f64; m + 1];
    for k in 1..m {
        row[k] = row[k - 1] * (m - k + 1) as f64 / k as f64;
    }
    row
}

fn euler_sum<T: Transform + ?Sized>(f: &T, t: f64, a: f64, n: usize, m: usize) -> Option<f64> {
    let scale = (0.5 * a).exp() / t;
    let mut partial = 0.5 * f.at_complex(Complex64::new(a / (2.0 * t), 0.0))?.re;
    let mut sums = Vec::with_capacity(m + 1);
    for k in 1..=(n + m) {
        let s = Complex64::new(a, 2.0 * k as f64 * std::f64::consts::PI) / (2.0 * t);
        let term = f.at_complex(s)?.re;
        partial += if k % 2 == 0 { term } else { -term };
        if k >= n {
            sums.push(partial);
        }
    }
    let binom = binomial_row(m);
    let avg = compensated_sum(sums.iter().zip(&binom).map(|(s, b)| s * b)) / 2f64.powi(m as i32);
    Some(scale * avg)
}

/// Abate–Whitt Euler inversion. Returns the value and a self-consistency
/// error estimate (difference between two summation lengths).
pub fn euler_invert<T: Transform + ?Sized>(f: &T, t: f64) -> Option<(f64, f64)> {
    let a = 18.4;
    let fine = euler_sum(f, t, a, 30, 15)?;
    let coarse = euler_sum(f, t, a, 20, 11)?;
    Some((fine, (fine - coarse).abs()))
}

/// Inverts `f` at `t > 0`.
///
/// Gaver–Stehfest with `terms` weights is tried first; if its error estimate
/// exceeds [`DEFAULT_TOL`] (relative, floored at 1 in absolute terms for small
/// values) and the transform is complex-capable, Euler summation is used.
pub fn laplace_invert<T: Transform + ?Sized>(f: &T, t: f64, terms: usize) -> Result<f64> {
    laplace_invert_tol(f, t, terms, DEFAULT_TOL)
}

pub fn laplace_invert_tol<T: Transform + ?Sized>(f: &T, t: f64, terms: usize, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::DomainMsg(format!("inversion point t = {t} must be positive")));
    }
    let gs = gaver_stehfest(f, t, terms);
    let accept = |value: f64, err: f64| err <= tol * value.abs().max(1.0);
    if gs.value.is_finite() && accept(gs.value, gs.error()) {
        return Ok(gs.value);
    }
    match euler_invert(f, t) {
        Some((v, e)) if v.is_finite() && accept(v, e) => Ok(v),
        Some((_, e)) => Err(Error::PrecisionLoss { estimate: e.min(gs.error()) }),
        None => Err(Error::PrecisionLoss { estimate: gs.error() }),
    }
}

/// Inverts after shifting the abscissa: `f(t) = e^{ct} L^{-1}[F(s + c)](t)`.
/// Used for exponentially growing originals whose transform has a pole at a
/// positive abscissa.
pub fn laplace_invert_shifted<T: Transform + ?Sized>(f: &T, t: f64, shift: f64, terms: usize) -> Result<f64> {
    laplace_invert_shifted_tol(f, t, shift, terms, DEFAULT_TOL)
}

pub fn laplace_invert_shifted_tol<T: Transform + ?Sized>(
    f: &T,
    t: f64,
    shift: f64,
    terms: usize,
    tol: f64,
) -> Result<f64> {
    struct Shifted<'a, T: ?Sized> {
        inner: &'a T,
        shift: f64,
    }
    impl<T: Transform + ?Sized> Transform for Shifted<'_, T> {
        fn at(&self, s: f64) -> f64 {
            self.inner.at(s + self.shift)
        }
        fn at_complex(&self, s: Complex64) -> Option<Complex64> {
            self.inner.at_complex(s + self.shift)
        }
    }
    let g = Shifted { inner: f, shift };
    laplace_invert_tol(&g, t, terms, tol).map(|v| v * (shift * t).exp())
}
