use crate::error::{Error, Result};

pub const MAX_ITER: usize = 200;

/// Safeguarded Newton iteration on a sign-changing bracket `[lo, hi]`.
///
/// `f` returns `(value, derivative)`. A Newton step that leaves the current
/// bracket (or a missing derivative) falls back to bisection, so convergence
/// is never worse than bisection.
pub fn newton_bisect<F>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Convergence(format!("no sign change on [{lo}, {hi}] (f = {flo:e}, {fhi:e})")));
    }
    let lo_negative = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo).abs() <= x_tol * (1.0 + x.abs()) {
            return Ok(0.5 * (lo + hi));
        }
        let step = fx / dfx;
        let newton = x - step;
        if dfx.is_finite() && dfx != 0.0 && newton > lo && newton < hi {
            if step.abs() <= 0.1 * x_tol * (1.0 + x.abs()) {
                return Ok(newton);
            }
            x = newton;
        } else {
            x = 0.5 * (lo + hi);
        }
    }
    Err(Error::Convergence(format!("no convergence on [{lo}, {hi}] after {MAX_ITER} iterations")))
}

/// Plain bisection; used where an independent route is wanted.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        return Err(Error::Convergence(format!("no sign change on [{lo}, {hi}]")));
    }
    let lo_negative = flo < 0.0;
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > x_tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
