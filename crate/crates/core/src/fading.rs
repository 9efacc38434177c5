//! Laws of the adapted received power and of the per-subcarrier SINR under
//! Rayleigh fading with interference-constrained power adaptation.

use libm::{exp, expm1, fabs, log1p};

use crate::law::ContinuousLaw;
use crate::specfun::{integrate_semi_infinite, scaled_exp_integral_e1};
use crate::{Error, Result};

/// Linear-scale link parameters: SU peak power `su_power`, PU power
/// `pu_power`, interference threshold `psi` and noise power `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    su_power: f64,
    pu_power: f64,
    psi: f64,
    eta: f64,
}

impl LinkParams {
    pub fn new(su_power: f64, pu_power: f64, psi: f64, eta: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && !v.is_nan();
        if !(ok(su_power) && su_power.is_finite()) {
            return Err(Error::InvalidParameter("SU power must be positive and finite"));
        }
        if !(ok(pu_power) && pu_power.is_finite()) {
            return Err(Error::InvalidParameter("PU power must be positive and finite"));
        }
        if !ok(psi) {
            return Err(Error::InvalidParameter("interference threshold must be positive"));
        }
        if !(ok(eta) && eta.is_finite()) {
            return Err(Error::InvalidParameter("noise power must be positive and finite"));
        }
        Ok(Self { su_power, pu_power, psi, eta })
    }

    pub fn su_power(&self) -> f64 {
        self.su_power
    }
    pub fn pu_power(&self) -> f64 {
        self.pu_power
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `1 - exp(-psi / Pm)`, the probability that the peak power is usable.
    pub(crate) fn peak_prob(&self) -> f64 {
        -expm1(-self.psi / self.su_power)
    }
}

/// Transmit power under peak and interference constraints.
pub fn adapted_power(su_power: f64, psi: f64, h_mp: f64) -> f64 {
    if h_mp <= 0.0 {
        return su_power;
    }
    su_power.min(psi / h_mp)
}

/// CDF of the received SU power `lambda = h P^T`.
pub fn cdf_lambda(x: f64, lp: &LinkParams) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let (pm, psi) = (lp.su_power, lp.psi);
    let ratio = if psi.is_infinite() { 0.0 } else { x / (psi + x) };
    (-expm1(-x / pm) + ratio * exp(-(x + psi) / pm)).min(1.0)
}

/// Survival function of `lambda`, accurate in the upper tail.
pub fn sf_lambda(x: f64, lp: &LinkParams) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let (pm, psi) = (lp.su_power, lp.psi);
    if psi.is_infinite() {
        return exp(-x / pm);
    }
    exp(-x / pm) * (1.0 - x / (psi + x) * exp(-psi / pm))
}

/// Density of `lambda`.
pub fn pdf_lambda(x: f64, lp: &LinkParams) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let (pm, psi) = (lp.su_power, lp.psi);
    if psi.is_infinite() {
        return exp(-x / pm) / pm;
    }
    let s = psi + x;
    let bracket = 1.0 - exp(-psi / pm) * (x * x + psi * x - psi * pm) / (s * s);
    exp(-x / pm) / pm * bracket
}

/// Mean of `lambda`.
pub fn mean_lambda(lp: &LinkParams) -> f64 {
    let (pm, psi) = (lp.su_power, lp.psi);
    if psi.is_infinite() {
        return pm;
    }
    let e1 = scaled_exp_integral_e1(psi / pm).unwrap_or(0.0) * exp(-psi / pm);
    pm * lp.peak_prob() + psi * e1
}

/// Shared pieces of the interference-limited SINR law.
struct InterferenceTerms {
    /// e^z E1(z)
    scaled_e1: f64,
    /// exp(-(eta x + psi)/Pm)
    decay: f64,
}

fn interference_terms(x: f64, lp: &LinkParams) -> InterferenceTerms {
    let (pm, pn, psi, eta) = (lp.su_power, lp.pu_power, lp.psi, lp.eta);
    let z = (eta + psi / x) * (1.0 / pn + x / pm);
    InterferenceTerms { scaled_e1: scaled_exp_integral_e1(z).unwrap_or(0.0), decay: exp(-(eta * x + psi) / pm) }
}

/// CDF of the SINR on a subcarrier shared with a primary user.
pub fn cdf_sinr_interference(x: f64, lp: &LinkParams) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let (pm, pn, psi, eta) = (lp.su_power, lp.pu_power, lp.psi, lp.eta);
    if psi.is_infinite() {
        return 1.0 - exp(-x * eta / pm) / (1.0 + x * pn / pm);
    }
    let t = interference_terms(x, lp);
    let first = lp.peak_prob() * exp(-x * eta / pm) / (1.0 + x * pn / pm);
    let second = psi / x / pn * t.decay * t.scaled_e1;
    let v = 1.0 - first - second;
    if v < SMALL_CDF {
        return cdf_sinr_interference_integral(x, lp);
    }
    v.min(1.0)
}

const SMALL_CDF: f64 = 1e-4;

/// CDF of the interference-limited SINR by direct integration,
/// `int F_lambda(x (y + eta)) f_I(y) dy`.
pub fn cdf_sinr_interference_integral(x: f64, lp: &LinkParams) -> f64 {
    let (pn, eta) = (lp.pu_power, lp.eta);
    let est = integrate_semi_infinite(|y| cdf_lambda(x * (y + eta), lp) * exp(-y / pn) / pn, 0.0, pn, 1e-11, 0.0);
    est.map(|e| e.value.clamp(0.0, 1.0)).unwrap_or(f64::NAN)
}

/// Survival function of the interference-limited SINR.
pub fn sf_sinr_interference(x: f64, lp: &LinkParams) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let (pm, pn, psi, eta) = (lp.su_power, lp.pu_power, lp.psi, lp.eta);
    if psi.is_infinite() {
        return exp(-x * eta / pm) / (1.0 + x * pn / pm);
    }
    let t = interference_terms(x, lp);
    let first = lp.peak_prob() * exp(-x * eta / pm) / (1.0 + x * pn / pm);
    let v = first + psi / x / pn * t.decay * t.scaled_e1;
    if v > 1.0 - SMALL_CDF {
        return 1.0 - cdf_sinr_interference_integral(x, lp);
    }
    v.max(0.0)
}

const CANCELLATION: f64 = 1e-6;

/// Density of the interference-limited SINR. Where the closed form loses
/// its digits to cancellation the density is integrated directly over the
/// interference power.
pub fn pdf_sinr_interference(x: f64, lp: &LinkParams) -> f64 {
    if x < 0.0 || x.is_infinite() {
        return 0.0;
    }
    let (pm, pn, psi, eta) = (lp.su_power, lp.pu_power, lp.psi, lp.eta);
    if x == 0.0 || psi.is_infinite() {
        return pdf_sinr_interference_integral(x, lp);
    }
    let t = interference_terms(x, lp);
    let d = x * pn + pm;
    let a = (x * eta * pn + pm * (eta + pn)) / (d * d);
    let first = a * lp.peak_prob() * exp(-x * eta / pm);
    let lead = (psi + x * pn) * t.scaled_e1;
    let b = x * pn * (x * x * eta * pn - psi * pm) / ((x * eta + psi) * d);
    let bracket = lead + b;
    if fabs(bracket) < CANCELLATION * fabs(lead).max(fabs(b)) {
        return pdf_sinr_interference_integral(x, lp);
    }
    let second = psi / x / x / x / pn / pn * t.decay * bracket;
    (first + second).max(0.0)
}

/// Density of the interference-limited SINR by direct integration,
/// `int (y + eta) f_lambda(x (y + eta)) f_I(y) dy`.
pub fn pdf_sinr_interference_integral(x: f64, lp: &LinkParams) -> f64 {
    let (pn, eta) = (lp.pu_power, lp.eta);
    let est =
        integrate_semi_infinite(|y| (y + eta) * pdf_lambda(x * (y + eta), lp) * exp(-y / pn) / pn, 0.0, pn, 1e-11, 0.0);
    est.map(|e| e.value.max(0.0)).unwrap_or(f64::NAN)
}

/// CDF of the SINR on a free subcarrier.
pub fn cdf_sinr_nointerference(x: f64, lp: &LinkParams) -> f64 {
    cdf_lambda(lp.eta * x, lp)
}

pub fn sf_sinr_nointerference(x: f64, lp: &LinkParams) -> f64 {
    sf_lambda(lp.eta * x, lp)
}

pub fn pdf_sinr_nointerference(x: f64, lp: &LinkParams) -> f64 {
    lp.eta * pdf_lambda(lp.eta * x, lp)
}

/// Received-power law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaLaw(pub LinkParams);

/// SINR law on a subcarrier shared with a primary user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrInterference(pub LinkParams);

/// SINR law on a free subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrNoInterference(pub LinkParams);

impl ContinuousLaw for LambdaLaw {
    fn pdf(&self, x: f64) -> f64 {
        pdf_lambda(x, &self.0)
    }
    fn cdf(&self, x: f64) -> f64 {
        cdf_lambda(x, &self.0)
    }
    fn sf(&self, x: f64) -> f64 {
        sf_lambda(x, &self.0)
    }
}

impl ContinuousLaw for SinrInterference {
    fn pdf(&self, x: f64) -> f64 {
        pdf_sinr_interference(x, &self.0)
    }
    fn cdf(&self, x: f64) -> f64 {
        cdf_sinr_interference(x, &self.0)
    }
    fn sf(&self, x: f64) -> f64 {
        sf_sinr_interference(x, &self.0)
    }
}

impl ContinuousLaw for SinrNoInterference {
    fn pdf(&self, x: f64) -> f64 {
        pdf_sinr_nointerference(x, &self.0)
    }
    fn cdf(&self, x: f64) -> f64 {
        cdf_sinr_nointerference(x, &self.0)
    }
    fn sf(&self, x: f64) -> f64 {
        sf_sinr_nointerference(x, &self.0)
    }
}

/// Law of `C = ln(1 + S)` given the law of `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityLaw<L>(pub L);

pub fn capacity_pdf_transform<L: ContinuousLaw>(sinr: L) -> CapacityLaw<L> {
    CapacityLaw(sinr)
}

impl<L: ContinuousLaw> ContinuousLaw for CapacityLaw<L> {
    fn pdf(&self, c: f64) -> f64 {
        if c < 0.0 {
            return 0.0;
        }
        let s = expm1(c);
        if s.is_infinite() {
            return 0.0;
        }
        let v = (1.0 + s) * self.0.pdf(s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    }
    fn cdf(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        self.0.cdf(expm1(c))
    }
    fn sf(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return 1.0;
        }
        self.0.sf(expm1(c))
    }
}

/// Shannon capacity in nats.
pub fn capacity_of_sinr(s: f64) -> f64 {
    log1p(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp() -> LinkParams {
        LinkParams::new(100.0, 10.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn lambda_law_limits() {
        let p = lp();
        assert_eq!(cdf_lambda(0.0, &p), 0.0);
        assert!((cdf_lambda(1e5, &p) - 1.0).abs() < 1e-12);
        // infinite threshold: exponential with mean Pm
        let q = LinkParams::new(2.0, 1.0, f64::INFINITY, 1.0).unwrap();
        assert!((cdf_lambda(1.0, &q) - (1.0 - exp(-0.5))).abs() < 1e-15);
        assert!((pdf_lambda(1.0, &q) - exp(-0.5) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sf_and_cdf_agree() {
        let p = lp();
        for &x in &[1e-3, 0.1, 1.0, 7.0, 40.0] {
            assert!((cdf_sinr_interference(x, &p) + sf_sinr_interference(x, &p) - 1.0).abs() < 1e-14);
            assert!((cdf_lambda(x, &p) + sf_lambda(x, &p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_integral_route() {
        let p = LinkParams::new(1000.0, 10.0, 10.0, 1.0).unwrap();
        for &x in &[0.05, 0.3, 1.0, 4.0, 30.0] {
            let a = pdf_sinr_interference(x, &p);
            let b = pdf_sinr_interference_integral(x, &p);
            assert!(((a - b) / b).abs() < 1e-8, "x={x} {a} {b}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LinkParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(LinkParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(LinkParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
    }
}
