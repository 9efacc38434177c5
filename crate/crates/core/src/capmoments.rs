//! Capacity moments and the moment-matched Gamma approximation.

use libm::{exp, expm1, fabs, lgamma, log, log1p};

use crate::fading::{sf_sinr_interference, sf_sinr_nointerference, LinkParams};
use crate::law::ContinuousLaw;
use crate::specfun::{
    exp_integral_e1, integrate_semi_infinite, regularized_gamma_pq, scaled_exp_integral_e1, QuadratureRule,
};
use crate::{Error, Result};

pub const DEFAULT_RULE_ORDER: usize = 50;

/// Gamma law with shape `shape` and scale `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    shape: f64,
    scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidParameter("Gamma shape must be positive and finite"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter("Gamma scale must be positive and finite"));
        }
        Ok(Self { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }
    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }
    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    /// Shape multiplied by `k`, the law of a sum of `k` independent copies.
    pub fn times(&self, k: f64) -> Result<Self> {
        Self::new(self.shape * k, self.scale)
    }
}

impl ContinuousLaw for GammaParams {
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return if self.shape < 1.0 {
                f64::INFINITY
            } else if self.shape == 1.0 {
                1.0 / self.scale
            } else {
                0.0
            };
        }
        exp(ln_gamma_density(self.shape, self.scale, x, lgamma(self.shape)))
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        regularized_gamma_pq(self.shape, x / self.scale).map(|(p, _)| p).unwrap_or(f64::NAN)
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        regularized_gamma_pq(self.shape, x / self.scale).map(|(_, q)| q).unwrap_or(f64::NAN)
    }
}

/// Log density of Gamma(shape, scale) at `x > 0` given `lgamma(shape)`.
pub(crate) fn ln_gamma_density(shape: f64, scale: f64, x: f64, lg: f64) -> f64 {
    (shape - 1.0) * log(x / scale) - x / scale - lg - log(scale)
}

/// First two raw moments of a per-subcarrier capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityMoments {
    pub mean: f64,
    pub second_moment: f64,
}

impl CapacityMoments {
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

fn tail_integral<F: FnMut(f64) -> f64>(f: F, scale: f64) -> Result<f64> {
    let e = integrate_semi_infinite(f, 0.0, scale, 1e-12, 1e-15)?;
    if !e.converged {
        return Err(Error::NoConvergence("capacity tail integral"));
    }
    Ok(e.value)
}

/// Mean capacity in nats on a free subcarrier.
pub fn mean_capacity_nointerference(lp: &LinkParams) -> Result<f64> {
    let (pm, psi, eta) = (lp.su_power(), lp.psi(), lp.eta());
    let a = scaled_exp_integral_e1(eta / pm)?;
    if psi.is_infinite() {
        return Ok(a);
    }
    if psi == eta {
        let e1 = exp_integral_e1(eta / pm)?;
        return Ok(a - eta / pm * e1 - e1 + exp(-eta / pm));
    }
    if fabs(psi - eta) < 1e-3 * eta {
        return tail_integral(|s| sf_sinr_nointerference(s, lp) / (1.0 + s), 1.0);
    }
    let e1_psi = exp_integral_e1(psi / pm)?;
    Ok(a * (1.0 + exp(-psi / pm) * eta / (psi - eta)) + psi / (eta - psi) * e1_psi)
}

/// Mean capacity in nats on a subcarrier shared with a primary user.
pub fn mean_capacity_interference(lp: &LinkParams) -> Result<f64> {
    let (pm, pn, psi, eta) = (lp.su_power(), lp.pu_power(), lp.psi(), lp.eta());
    if fabs(1.0 - pn / pm) < 1e-6 || psi.is_infinite() {
        return tail_integral(|s| sf_sinr_interference(s, lp) / (1.0 + s), 1.0);
    }
    let lead =
        lp.peak_prob() / (1.0 - pn / pm) * (scaled_exp_integral_e1(eta / pm)? - scaled_exp_integral_e1(eta / pn)?);
    let inner = tail_integral(
        |x| {
            if x == 0.0 {
                return pn / psi;
            }
            let z = (eta + psi / x) * (1.0 / pn + x / pm);
            scaled_exp_integral_e1(z).unwrap_or(0.0) * exp(-eta * x / pm) / (x * (1.0 + x))
        },
        1.0,
    )?;
    Ok(lead + psi / pn * exp(-psi / pm) * inner)
}

// int 2c P(C > c) dc over log c. Below 1e-5 E[C] the integrand adds at most
// 1e-10 E[C]^2; above ln(1 + 45 Pm/eta) the survival is below e^-45.
fn second_moment_by_rule<S: Fn(f64) -> f64>(sf: S, lp: &LinkParams, mean: f64, rule: &QuadratureRule) -> Result<f64> {
    let hi = log(log1p(45.0 * lp.su_power() / lp.eta()));
    let lo = log(1e-5 * mean);
    if !(lo < hi) || !lo.is_finite() {
        return Err(Error::InvalidParameter("capacity range for the second moment is empty"));
    }
    Ok(rule.on_interval(lo, hi).integrate(|u| {
        let c = exp(u);
        2.0 * c * c * sf(expm1(c))
    }))
}

/// `E[C^2]` on a shared subcarrier. `rule` is a rule on `[-1, 1]`, see
/// [`fejer_rule`](crate::specfun::fejer_rule).
pub fn second_moment_interference(lp: &LinkParams, rule: &QuadratureRule) -> Result<f64> {
    Ok(moments_interference(lp, rule)?.second_moment)
}

/// `E[C^2]` on a free subcarrier.
pub fn second_moment_nointerference(lp: &LinkParams, rule: &QuadratureRule) -> Result<f64> {
    Ok(moments_nointerference(lp, rule)?.second_moment)
}

pub fn moments_interference(lp: &LinkParams, rule: &QuadratureRule) -> Result<CapacityMoments> {
    let mean = mean_capacity_interference(lp)?;
    Ok(CapacityMoments { mean, second_moment: second_moment_by_rule(|s| sf_sinr_interference(s, lp), lp, mean, rule)? })
}

pub fn moments_nointerference(lp: &LinkParams, rule: &QuadratureRule) -> Result<CapacityMoments> {
    let mean = mean_capacity_nointerference(lp)?;
    Ok(CapacityMoments {
        mean,
        second_moment: second_moment_by_rule(|s| sf_sinr_nointerference(s, lp), lp, mean, rule)?,
    })
}

/// Gamma law with the given mean and variance.
pub fn match_gamma(m: &CapacityMoments) -> Result<GammaParams> {
    let var = m.variance();
    if !(m.mean > 0.0) || !(var > 0.0) || !var.is_finite() {
        return Err(Error::DegenerateFit);
    }
    GammaParams::new(m.mean * m.mean / var, var / m.mean)
}

/// Gamma fits for the shared and free subcarrier capacities of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFits {
    pub interference: GammaParams,
    pub nointerference: GammaParams,
}

pub fn fit_link(lp: &LinkParams, rule: &QuadratureRule) -> Result<LinkFits> {
    Ok(LinkFits {
        interference: match_gamma(&moments_interference(lp, rule)?)?,
        nointerference: match_gamma(&moments_nointerference(lp, rule)?)?,
    })
}
