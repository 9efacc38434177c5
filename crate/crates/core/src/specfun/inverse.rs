use libm::{exp, fabs, lgamma, log, sqrt};

use super::gamma::regularized_gamma_p;
use crate::{Error, Result};

const MAX_ITER: usize = 400;

/// Solves `P(a, x) = q` for `x`.
pub fn inverse_regularized_gamma_p(a: f64, q: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain("shape must be positive and finite"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("probability must lie in (0, 1)"));
    }
    let f = |x: f64| regularized_gamma_p(a, x).map(|p| p - q);

    let mut lo = 1e-12;
    while f(lo)? > 0.0 {
        lo *= 1e-3;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Bracket("inverse gamma lower end"));
        }
    }
    let mut hi = a + 10.0 * sqrt(a) + 50.0;
    while f(hi)? < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Bracket("inverse gamma upper end"));
        }
    }

    let mut iter = 0;
    while hi - lo > 1e-3 {
        let mid = if hi > 100.0 * lo { sqrt(lo) * sqrt(hi) } else { 0.5 * (lo + hi) };
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::NoConvergence("inverse gamma bisection"));
        }
    }

    // Newton in log x keeps tiny roots well scaled
    let ln_density = |x: f64| a * log(x) - x - lgamma(a);
    let mut x = if hi > 100.0 * lo { sqrt(lo) * sqrt(hi) } else { 0.5 * (lo + hi) };
    for _ in 0..MAX_ITER {
        let r = f(x)?;
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = exp(ln_density(x));
        let mut next = x * exp(-r / d);
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi > 4.0 * lo { sqrt(lo) * sqrt(hi) } else { 0.5 * (lo + hi) };
        }
        if fabs(next - x) <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence("inverse gamma Newton"))
}

/// Inverse of the leading term `v^u / (u Gamma(u))` in `v`.
pub fn inverse_leading_term(u: f64, q: f64) -> Result<f64> {
    if !(u > 0.0) || !(q > 0.0) {
        return Err(Error::Domain("leading term inverse needs u > 0 and q > 0"));
    }
    Ok(exp((log(q) + log(u) + lgamma(u)) / u))
}
