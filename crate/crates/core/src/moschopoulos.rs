//! Exact law of a sum of independent Gamma variables with distinct scales,
//! written as a Gamma mixture, and the resulting capacity laws.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use libm::{exp, lgamma, log, sqrt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::capmoments::{ln_gamma_density, GammaParams};
use crate::collision::{
    mvhypergeom_pmf, mvhypergeom_sample, mvhypergeom_support, mvhypergeom_support_size, CollisionVector,
    Marginalization, SubcarrierPool,
};
use crate::law::ContinuousLaw;
use crate::specfun::{regularized_gamma_pq, KahanSum};
use crate::system::SystemConfig;
use crate::{Error, Result};

/// Truncation control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub initial_terms: usize,
    pub tolerance: f64,
    pub max_terms: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { initial_terms: 25, tolerance: 1e-8, max_terms: 1 << 14 }
    }
}

const RESCALE: f64 = 1e250;

/// Mixture `sum_k w_k Gamma(rho + k, beta_min)` truncated after `h` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct MoschopoulosSeries {
    components: Vec<GammaParams>,
    beta_min: f64,
    rho: f64,
    ln_prefactor: f64,
    // recursion state
    ratios: Vec<f64>,
    powers: Vec<f64>,
    moments: Vec<f64>,
    deltas: Vec<f64>,
    ln_scale: f64,
    weights: Vec<f64>,
    mass: KahanSum,
    ln_gamma: Vec<f64>,
}

impl MoschopoulosSeries {
    /// Series with exactly `h` terms. Components with zero shape are
    /// dropped.
    pub fn build(components: &[(f64, f64)], h: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::InvalidParameter("series needs at least one term"));
        }
        let mut comps = Vec::new();
        for &(shape, scale) in components {
            if shape == 0.0 {
                continue;
            }
            comps.push(GammaParams::new(shape, scale)?);
        }
        if comps.is_empty() {
            return Err(Error::InvalidParameter("no component with positive shape"));
        }
        let beta_min = comps.iter().map(|g| g.scale()).fold(f64::INFINITY, f64::min);
        let rho: f64 = comps.iter().map(|g| g.shape()).sum();
        let ln_prefactor: f64 = comps.iter().map(|g| g.shape() * log(beta_min / g.scale())).sum();
        let ratios: Vec<f64> = comps.iter().map(|g| 1.0 - beta_min / g.scale()).collect();
        let mut s = Self {
            powers: alloc::vec![1.0; comps.len()],
            components: comps,
            beta_min,
            rho,
            ln_prefactor,
            ratios,
            moments: Vec::new(),
            deltas: alloc::vec![1.0],
            ln_scale: 0.0,
            weights: alloc::vec![exp(ln_prefactor)],
            mass: KahanSum::new(),
            ln_gamma: alloc::vec![lgamma(rho)],
        };
        s.mass.add(s.weights[0]);
        s.extend_to(h);
        Ok(s)
    }

    /// Series grown by doubling from `opts.initial_terms` until the
    /// neglected mixture mass falls below `opts.tolerance`.
    pub fn with_tolerance(components: &[(f64, f64)], opts: &SeriesOptions) -> Result<Self> {
        let mut s = Self::build(components, opts.initial_terms.max(1))?;
        while s.truncation_bound() > opts.tolerance {
            let next = s.terms() * 2;
            if next > opts.max_terms {
                return Err(Error::Truncation { bound: s.truncation_bound(), tolerance: opts.tolerance });
            }
            s.extend_to(next);
        }
        Ok(s)
    }

    fn extend_to(&mut self, h: usize) {
        while self.deltas.len() < h {
            let k = self.deltas.len();
            // moments[i-1] = sum_j alpha_j r_j^i
            let mut m = 0.0;
            for ((p, r), g) in self.powers.iter_mut().zip(&self.ratios).zip(&self.components) {
                *p *= r;
                m += g.shape() * *p;
            }
            self.moments.push(m);
            let mut acc = 0.0;
            for i in 1..=k {
                acc += self.moments[i - 1] * self.deltas[k - i];
            }
            let mut d = acc / k as f64;
            if d > RESCALE {
                for x in self.deltas.iter_mut() {
                    *x /= RESCALE;
                }
                d /= RESCALE;
                self.ln_scale += log(RESCALE);
            }
            self.deltas.push(d);
            let w = if d > 0.0 { exp(self.ln_prefactor + self.ln_scale + log(d)) } else { 0.0 };
            self.weights.push(w);
            self.mass.add(w);
            self.ln_gamma.push(lgamma(self.rho + k as f64));
        }
    }

    pub fn terms(&self) -> usize {
        self.weights.len()
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }
    pub fn components(&self) -> &[GammaParams] {
        &self.components
    }
    /// Mixture weights `w_k = C delta_k`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// `ln C` with `C = prod (beta_min / beta_j)^alpha_j`.
    pub fn ln_prefactor(&self) -> f64 {
        self.ln_prefactor
    }
    /// Recursion coefficients `delta_k`; entries beyond the `f64` range
    /// come back infinite.
    pub fn deltas(&self) -> Vec<f64> {
        self.deltas.iter().map(|d| d * exp(self.ln_scale)).collect()
    }

    /// Neglected mixture mass. Bounds the truncation error of the CDF and
    /// the survival function.
    pub fn truncation_bound(&self) -> f64 {
        (1.0 - self.mass.value()).max(0.0)
    }

    /// Bound on the truncation error of the density at any point.
    pub fn pdf_error_bound(&self) -> f64 {
        if self.rho + self.terms() as f64 >= 1.0 {
            self.truncation_bound() / self.beta_min
        } else {
            f64::INFINITY
        }
    }

    /// Density of the truncated series.
    pub fn pdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let b = self.beta_min;
        if y == 0.0 {
            return if self.rho < 1.0 {
                f64::INFINITY
            } else if self.rho == 1.0 {
                self.weights[0] / b
            } else {
                0.0
            };
        }
        let mut acc = KahanSum::new();
        for (k, w) in self.weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let a = self.rho + k as f64;
            acc.add(w * exp(ln_gamma_density(a, b, y, self.ln_gamma[k])));
        }
        acc.value()
    }

    // x^a e^-x / Gamma(a + 1)
    fn step(&self, k: usize, x: f64, lx: f64) -> f64 {
        let a = self.rho + k as f64;
        exp(a * lx - x - self.ln_gamma[k] - log(a))
    }

    /// Truncated CDF `sum_{k<h} w_k P(rho + k, y / beta_min)`. The exact
    /// value lies within `truncation_bound` above it.
    pub fn cdf_lower(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let x = y / self.beta_min;
        let lx = log(x);
        let h = self.terms();
        let mut p = regularized_gamma_pq(self.rho + (h - 1) as f64, x).map(|v| v.0).unwrap_or(f64::NAN);
        let mut acc = KahanSum::new();
        for k in (0..h).rev() {
            if k + 1 < h {
                p += self.step(k, x, lx);
            }
            acc.add(self.weights[k] * p.min(1.0));
        }
        acc.value()
    }

    /// Truncated survival function `sum_{k<h} w_k Q(rho + k, y / beta_min)`.
    pub fn sf_lower(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return self.mass.value();
        }
        let x = y / self.beta_min;
        let lx = log(x);
        let mut q = regularized_gamma_pq(self.rho, x).map(|v| v.1).unwrap_or(f64::NAN);
        let mut acc = KahanSum::new();
        for (k, w) in self.weights.iter().enumerate() {
            if k > 0 {
                q += self.step(k - 1, x, lx);
            }
            acc.add(w * q.min(1.0));
        }
        acc.value()
    }

    /// Density, refused when the truncation bound exceeds `tol`.
    pub fn pdf_checked(&self, y: f64, tol: f64) -> Result<f64> {
        let bound = self.pdf_error_bound();
        if bound > tol {
            return Err(Error::Truncation { bound, tolerance: tol });
        }
        Ok(self.pdf(y).max(0.0))
    }

    /// CDF, refused when the truncation bound exceeds `tol`.
    pub fn cdf_checked(&self, y: f64, tol: f64) -> Result<f64> {
        let bound = self.truncation_bound();
        if bound > tol {
            return Err(Error::Truncation { bound, tolerance: tol });
        }
        Ok(self.cdf_lower(y).clamp(0.0, 1.0))
    }

    /// Survival function, refused unless the truncation bound is below
    /// `rel_tol` times the value.
    pub fn sf_checked(&self, y: f64, rel_tol: f64) -> Result<f64> {
        let v = self.sf_lower(y);
        let bound = self.truncation_bound();
        if bound > rel_tol * v {
            return Err(Error::Truncation { bound, tolerance: rel_tol * v });
        }
        Ok(v.min(1.0))
    }

    /// Mean of the truncated mixture.
    pub fn mean(&self) -> f64 {
        let mut acc = KahanSum::new();
        for (k, w) in self.weights.iter().enumerate() {
            acc.add(w * (self.rho + k as f64));
        }
        acc.value() * self.beta_min
    }

    /// Mean of the untruncated sum.
    pub fn exact_mean(&self) -> f64 {
        self.components.iter().map(|g| g.mean()).sum()
    }
}

impl ContinuousLaw for MoschopoulosSeries {
    fn pdf(&self, x: f64) -> f64 {
        MoschopoulosSeries::pdf(self, x).max(0.0)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.cdf_lower(x).clamp(0.0, 1.0)
    }
    fn sf(&self, x: f64) -> f64 {
        (self.sf_lower(x) + self.truncation_bound()).clamp(0.0, 1.0)
    }
}

/// Gamma fits of the per-subcarrier capacity on subcarriers shared with
/// each primary user and on free subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityFits {
    pub interference: Vec<GammaParams>,
    pub nointerference: GammaParams,
}

fn components_for(fits: &CapacityFits, kv: &CollisionVector) -> Vec<(f64, f64)> {
    let mut c: Vec<(f64, f64)> =
        fits.interference.iter().zip(&kv.per_pu).map(|(g, &k)| (g.shape() * k as f64, g.scale())).collect();
    c.push((fits.nointerference.shape() * kv.free as f64, fits.nointerference.scale()));
    c
}

/// Capacity law of an SU given its collision vector.
pub fn conditional_capacity_law(
    fits: &CapacityFits,
    kv: &CollisionVector,
    opts: &SeriesOptions,
) -> Result<MoschopoulosSeries> {
    if fits.interference.len() != kv.per_pu.len() {
        return Err(Error::InvalidParameter("one interference fit per primary user required"));
    }
    MoschopoulosSeries::with_tolerance(&components_for(fits, kv), opts)
}

/// Capacity law of an SU averaged over its collision vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCapacityLaw {
    terms: Vec<(f64, MoschopoulosSeries)>,
    sampled: Option<u32>,
}

pub fn marginal_capacity_law(
    cfg: &SystemConfig,
    fits: &CapacityFits,
    opts: &SeriesOptions,
    budget: &Marginalization,
) -> Result<MarginalCapacityLaw> {
    if fits.interference.len() != cfg.num_pus() {
        return Err(Error::InvalidParameter("one interference fit per primary user required"));
    }
    // primary users with identical fits act as one block
    let mut groups: Vec<(GammaParams, u32)> = Vec::new();
    for (g, &occ) in fits.interference.iter().zip(cfg.pool().occupied()) {
        match groups.iter_mut().find(|e| e.0 == *g) {
            Some(e) => e.1 += occ,
            None => groups.push((*g, occ)),
        }
    }
    let pool = SubcarrierPool::new(cfg.total(), groups.iter().map(|e| e.1).collect())?;
    let gfits =
        CapacityFits { interference: groups.iter().map(|e| e.0).collect(), nointerference: fits.nointerference };
    let fs = cfg.su_subcarriers();
    let mut terms = Vec::new();
    let sampled = if mvhypergeom_support_size(fs, &pool) <= budget.max_terms as f64 {
        for kv in mvhypergeom_support(fs, &pool) {
            let p = mvhypergeom_pmf(fs, &pool, &kv)?;
            if p > 0.0 {
                terms.push((p, conditional_capacity_law(&gfits, &kv, opts)?));
            }
        }
        None
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        let n = budget.fallback_samples.max(2);
        let mut counts: BTreeMap<CollisionVector, u32> = BTreeMap::new();
        for _ in 0..n {
            *counts.entry(mvhypergeom_sample(fs, &pool, &mut rng)?).or_insert(0) += 1;
        }
        for (kv, c) in counts {
            terms.push((c as f64 / n as f64, conditional_capacity_law(&gfits, &kv, opts)?));
        }
        Some(n)
    };
    Ok(MarginalCapacityLaw { terms, sampled })
}

impl MarginalCapacityLaw {
    /// `(probability, conditional law)` pairs.
    pub fn terms(&self) -> &[(f64, MoschopoulosSeries)] {
        &self.terms
    }

    /// Number of sampled collision vectors when exact marginalization was
    /// over budget.
    pub fn sampled(&self) -> Option<u32> {
        self.sampled
    }

    fn weighted<F: Fn(&MoschopoulosSeries) -> f64>(&self, f: F) -> (f64, Option<f64>) {
        let mut acc = KahanSum::new();
        for (p, s) in &self.terms {
            acc.add(p * f(s));
        }
        let mean = acc.value();
        let se = self.sampled.map(|n| {
            let n = n as f64;
            let var: f64 =
                self.terms.iter().map(|(p, s)| p * n * (f(s) - mean) * (f(s) - mean)).sum::<f64>() / (n - 1.0);
            sqrt(var / n)
        });
        (mean, se)
    }

    /// Density with its Monte Carlo standard error when sampled.
    pub fn pdf_with_error(&self, y: f64) -> (f64, Option<f64>) {
        self.weighted(|s| ContinuousLaw::pdf(s, y))
    }

    pub fn cdf_with_error(&self, y: f64) -> (f64, Option<f64>) {
        self.weighted(|s| ContinuousLaw::cdf(s, y))
    }

    /// Largest neglected mass over the conditional series.
    pub fn truncation_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.1.truncation_bound()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.weighted(|s| s.mean()).0
    }
}

impl ContinuousLaw for MarginalCapacityLaw {
    fn pdf(&self, x: f64) -> f64 {
        self.pdf_with_error(x).0
    }
    fn cdf(&self, x: f64) -> f64 {
        self.cdf_with_error(x).0.clamp(0.0, 1.0)
    }
    fn sf(&self, x: f64) -> f64 {
        self.weighted(|s| ContinuousLaw::sf(s, x)).0.clamp(0.0, 1.0)
    }
}

/// Probability that the SU capacity falls below `threshold`.
pub fn outage_probability<L: ContinuousLaw>(law: &L, threshold: f64) -> f64 {
    law.cdf(threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_exponentials() {
        // Exp(1) + Exp(2): density e^{-y/2} - e^{-y}
        let s = MoschopoulosSeries::with_tolerance(&[(1.0, 1.0), (1.0, 2.0)], &SeriesOptions::default()).unwrap();
        let want = exp(-0.5) - exp(-1.0);
        assert!((s.pdf(1.0) - want).abs() < 1e-8);
        let cdf = 1.0 - 2.0 * exp(-0.5) + exp(-1.0);
        assert!((s.cdf_lower(1.0) - cdf).abs() < 1e-8);
        assert_eq!(s.beta_min(), 1.0);
        assert_eq!(s.rho(), 2.0);
    }

    #[test]
    fn equal_scales_collapse() {
        let s = MoschopoulosSeries::build(&[(1.5, 0.7), (2.5, 0.7)], 25).unwrap();
        let g = GammaParams::new(4.0, 0.7).unwrap();
        for &y in &[0.1, 1.0, 3.0, 9.0] {
            assert!((s.pdf(y) - g.pdf(y)).abs() <= 4.0 * f64::EPSILON * g.pdf(y));
        }
        assert_eq!(s.truncation_bound(), 0.0);
    }

    #[test]
    fn zero_shapes_dropped() {
        let s = MoschopoulosSeries::build(&[(0.0, 0.1), (2.0, 1.0)], 10).unwrap();
        assert_eq!(s.beta_min(), 1.0);
        assert!(MoschopoulosSeries::build(&[(0.0, 1.0)], 10).is_err());
    }

    #[test]
    fn checked_evaluation_refuses_loose_series() {
        let s = MoschopoulosSeries::build(&[(3.0, 1.0), (3.0, 10.0)], 2).unwrap();
        assert!(matches!(s.cdf_checked(1.0, 1e-8), Err(Error::Truncation { .. })));
    }
}
