//! Gumbel asymptotics for the largest of `M` i.i.d. capacities.

use alloc::vec::Vec;

use libm::{exp, fabs};
use rand::RngCore;

use crate::capmoments::GammaParams;
use crate::collision::{hypergeom_pmf, hypergeom_support};
use crate::law::ContinuousLaw;
use crate::mcsim::EmpiricalDistribution;
use crate::moschopoulos::MoschopoulosSeries;
use crate::specfun::{inverse_regularized_gamma_p, EULER_GAMMA};
use crate::{Error, Result};

/// Location `b_M`, scale `a_M` and user count `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelParams {
    pub location: f64,
    pub scale: f64,
    pub users: u32,
}

const PROB_TOL: f64 = 1e-10;

/// `b_M = F^{-1}(1 - 1/M)` found through the survival function, and
/// `a_M = 1 / (M f(b_M))`.
pub fn gumbel_params<L: ContinuousLaw + ?Sized>(law: &L, users: u32) -> Result<GumbelParams> {
    if users < 2 {
        return Err(Error::InvalidParameter("need at least two users"));
    }
    let target = 1.0 / users as f64;
    let g = |x: f64| law.sf(x) - target;

    let mut lo = 0.0;
    if g(lo) <= 0.0 {
        // law with mass below zero
        lo = -1.0;
        while g(lo) <= 0.0 {
            lo *= 2.0;
            if lo < -1e300 {
                return Err(Error::Bracket("Gumbel location lower end"));
            }
        }
    }
    let mut hi = lo.max(0.0) + 1.0;
    while g(hi) > 0.0 {
        let next = lo.max(0.0) + 2.0 * (hi - lo.max(0.0));
        lo = hi;
        hi = next;
        if !hi.is_finite() {
            return Err(Error::Bracket("Gumbel location upper end"));
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..300 {
        let r = g(x);
        if fabs(r) <= PROB_TOL * target {
            break;
        }
        if r > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = law.pdf(x);
        let newton = x + r / d;
        x = if d > 0.0 && newton > lo && newton < hi && (hi - lo) < 1e-2 * (1.0 + fabs(x)) {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * fabs(x) {
            break;
        }
    }
    if fabs(g(x)) > PROB_TOL.max(1e-8 * target) {
        return Err(Error::NoConvergence("Gumbel location"));
    }
    let f = law.pdf(x);
    if !(f > 0.0) {
        return Err(Error::Bracket("flat CDF at the Gumbel location"));
    }
    Ok(GumbelParams { location: x, scale: 1.0 / (users as f64 * f), users })
}

/// `b_M + gamma a_M`, the large-`M` mean of the maximum.
pub fn asymptotic_max_capacity(gp: &GumbelParams) -> f64 {
    gp.location + EULER_GAMMA * gp.scale
}

/// Standard Gumbel CDF.
pub fn gumbel_cdf(z: f64) -> f64 {
    exp(-exp(-z))
}

/// Growth function `g(x) = (1 - F(x)) / f(x)` at one grid point, or the
/// reason it could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPoint {
    pub x: f64,
    pub value: Result<f64>,
}

/// Growth function of a series law along `grid`. Points where the
/// neglected mixture mass is not small against the survival function or
/// the density are reported as truncation errors.
pub fn von_mises_check(series: &MoschopoulosSeries, grid: &[f64], rel_tol: f64) -> Vec<GrowthPoint> {
    grid.iter()
        .map(|&x| {
            let value = series.sf_checked(x, rel_tol).and_then(|sf| {
                let f = series.pdf(x);
                let bound = series.pdf_error_bound();
                if bound > rel_tol * f {
                    return Err(Error::Truncation { bound, tolerance: rel_tol * f });
                }
                Ok(sf / f)
            });
            GrowthPoint { x, value }
        })
        .collect()
}

/// KS distance between the normalized maxima `(max - b_M)/a_M` of `M`
/// draws and the standard Gumbel law.
pub fn gumbel_cdf_distance<R, S>(gp: &GumbelParams, replications: usize, mut sample: S, rng: &mut R) -> Result<f64>
where
    R: RngCore + ?Sized,
    S: FnMut(&mut R) -> f64,
{
    let mut z = Vec::with_capacity(replications);
    for _ in 0..replications {
        let mut m = f64::NEG_INFINITY;
        for _ in 0..gp.users {
            m = m.max(sample(rng));
        }
        z.push((m - gp.location) / gp.scale);
    }
    Ok(EmpiricalDistribution::new(z)?.ks_statistic(gumbel_cdf))
}

/// The closed expression for `b_M` with one primary user, with the inverse
/// incomplete Gamma applied term by term inside the collision average and
/// the series truncated at `terms`. Kept as a diagnostic to compare with
/// [`gumbel_params`]; it fails when `(1 - 1/M)/beta_min` leaves `(0, 1)`.
pub fn termwise_inverse_location(
    fit_i: &GammaParams,
    fit_ni: &GammaParams,
    su_subcarriers: u32,
    occupied: u32,
    total: u32,
    users: u32,
    terms: usize,
) -> Result<f64> {
    if users < 2 {
        return Err(Error::InvalidParameter("need at least two users"));
    }
    let beta = fit_i.scale().min(fit_ni.scale());
    let q = (1.0 - 1.0 / users as f64) / beta;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("inverse incomplete Gamma argument outside (0, 1)"));
    }
    let (lo, hi) = hypergeom_support(su_subcarriers, occupied, total);
    let mut acc = 0.0;
    for k in lo..=hi {
        let p = hypergeom_pmf(su_subcarriers, occupied, total, k)?;
        let comps =
            [(fit_i.shape() * k as f64, fit_i.scale()), (fit_ni.shape() * (su_subcarriers - k) as f64, fit_ni.scale())];
        let s = MoschopoulosSeries::build(&comps, terms)?;
        let c = exp(s.ln_prefactor());
        let mut inner = 0.0;
        for (j, d) in s.deltas().iter().enumerate() {
            inner += d * inverse_regularized_gamma_p(s.rho() + j as f64, q)?;
        }
        acc += p * c * inner;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_exponential_constants() {
        let e = GammaParams::new(1.0, 1.0).unwrap();
        let gp = gumbel_params(&e, 100).unwrap();
        assert!((gp.location - libm::log(100.0)).abs() < 1e-10);
        assert!((gp.scale - 1.0).abs() < 1e-10);
        assert!((asymptotic_max_capacity(&gp) - 5.182_385_850_889_625).abs() < 1e-9);
    }

    #[test]
    fn median_at_two_users() {
        let g = GammaParams::new(2.5, 0.7).unwrap();
        let gp = gumbel_params(&g, 2).unwrap();
        assert!((g.cdf(gp.location) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn exponential_growth_function_is_flat() {
        let s = MoschopoulosSeries::build(&[(1.0, 1.7)], 5).unwrap();
        for p in von_mises_check(&s, &[0.5, 5.0, 20.0], 1e-6) {
            assert!((p.value.unwrap() - 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn termwise_formula_domain() {
        let a = GammaParams::new(0.5, 0.9).unwrap();
        let b = GammaParams::new(1.0, 0.9).unwrap();
        // beta below 1 - 1/M makes the argument exceed one
        assert!(termwise_inverse_location(&a, &b, 10, 40, 100, 200, 25).is_err());
    }
}
