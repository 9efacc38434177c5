use libm::{exp, fabs, lgamma, log};

use crate::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 100_000;
const LN_MAX: f64 = 709.782_712_893_384;

/// A value that may have exceeded the `f64` range. On overflow `value` is
/// `+inf` and `overflow` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saturating {
    pub value: f64,
    pub overflow: bool,
}

impl Saturating {
    fn from_ln(ln_value: f64) -> Self {
        if ln_value > LN_MAX {
            Saturating { value: f64::INFINITY, overflow: true }
        } else {
            Saturating { value: exp(ln_value), overflow: false }
        }
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

/// Natural log of the binomial coefficient. Exact products are used for
/// moderate `n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if n <= 1000 {
        let mut c = 1.0f64;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        log(c)
    } else {
        lgamma(n as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((n - k) as f64 + 1.0)
    }
}

// log of x^a e^-x / Gamma(a)
fn ln_prefactor(a: f64, x: f64) -> f64 {
    a * log(x) - x - lgamma(a)
}

fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if fabs(del) < fabs(sum) * EPS {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence("incomplete gamma series"))
}

// Lentz evaluation of the continued fraction for e^x x^-a Gamma(a, x).
fn upper_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if fabs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence("incomplete gamma continued fraction"))
}

/// Regularized incomplete gamma pair `(P(a, x), Q(a, x))`.
pub fn regularized_gamma_pq(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain("shape must be positive and finite"));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain("argument must be non-negative"));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    let lp = ln_prefactor(a, x);
    if x < a + 1.0 {
        let p = (exp(lp) * lower_series(a, x)?).min(1.0);
        Ok((p, 1.0 - p))
    } else {
        let q = (exp(lp) * upper_fraction(a, x)?).min(1.0);
        Ok((1.0 - q, q))
    }
}

pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    regularized_gamma_pq(a, x).map(|(p, _)| p)
}

pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64> {
    regularized_gamma_pq(a, x).map(|(_, q)| q)
}

/// Upper incomplete gamma `Gamma(a, x)` for `a >= 0`. At `a = 0` this is the
/// exponential integral `E1(x)`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<Saturating> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::Domain("shape must be non-negative and finite"));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain("argument must be non-negative"));
    }
    if a == 0.0 {
        if x == 0.0 {
            return Err(Error::Domain("Gamma(0, 0) is infinite"));
        }
        return Ok(Saturating { value: exp_integral_e1(x)?, overflow: false });
    }
    if x == 0.0 {
        return Ok(Saturating::from_ln(lgamma(a)));
    }
    if x < a + 1.0 {
        let p = exp(ln_prefactor(a, x)) * lower_series(a, x)?;
        Ok(Saturating::from_ln(lgamma(a) + libm::log1p(-p.min(1.0))))
    } else {
        let h = upper_fraction(a, x)?;
        Ok(Saturating::from_ln(a * log(x) - x + log(h)))
    }
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if fabs(add) < EPS * fabs(sum) {
            break;
        }
    }
    -super::EULER_GAMMA - log(x) - sum
}

fn e1_scaled_fraction(x: f64) -> Result<f64> {
    if x > 1e8 {
        let r = 1.0 / x;
        return Ok(r * (1.0 - r * (1.0 - 2.0 * r * (1.0 - 3.0 * r))));
    }
    let mut b = x + 1.0;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if fabs(del - 1.0) < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence("exponential integral continued fraction"))
}

/// Exponential integral `E1(x)` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain("E1 requires a positive argument"));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(exp(-x) * e1_scaled_fraction(x)?)
    }
}

/// `e^x E1(x)` evaluated without forming either factor separately for
/// large `x`.
pub fn scaled_exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain("E1 requires a positive argument"));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x <= 1.0 {
        Ok(exp(x) * e1_series(x))
    } else {
        e1_scaled_fraction(x)
    }
}

/// Leading term `v^u / (u Gamma(u))` of the small-argument expansion of
/// `P(u, v)`.
pub fn regularized_gamma_p_leading_term(u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0) || !(v >= 0.0) {
        return Err(Error::Domain("leading term needs u > 0 and v >= 0"));
    }
    Ok(exp(u * log(v) - log(u) - lgamma(u)))
}
