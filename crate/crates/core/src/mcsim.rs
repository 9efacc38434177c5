//! Monte Carlo oracle: reproducible streams, channel draws, capacity
//! realizations and empirical-distribution tools.

use alloc::vec::Vec;

use libm::{fabs, floor, log1p, sqrt};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::collision::{mvhypergeom_sample, CollisionVector};
use crate::fading::{adapted_power, LinkParams};
use crate::specfun::regularized_gamma_q;
use crate::system::SystemConfig;
use crate::{Error, Result};

pub type StreamRng = ChaCha8Rng;

/// Master seed plus stream index. Equal specs give identical streams;
/// distinct stream ids give independent ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn rng(&self) -> StreamRng {
        let mut r = ChaCha8Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_id);
        r
    }

    pub fn with_stream(&self, stream_id: u64) -> Self {
        Self { stream_id, ..*self }
    }
}

/// Unit-mean exponential variate by inversion.
pub fn unit_exponential<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -log1p(-u)
}

/// Per-subcarrier unit-mean exponential power gains: SU to SBS (`h_m`),
/// SU to PU receiver (`h_mp`) and PU to SBS (`g_ns`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelDraw {
    pub h_m: Vec<f64>,
    pub h_mp: Vec<f64>,
    pub g_ns: Vec<f64>,
}

impl ChannelDraw {
    pub fn len(&self) -> usize {
        self.h_m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_m.is_empty()
    }
}

/// `count` subcarriers of gains, drawn subcarrier by subcarrier in the
/// order `h_m, h_mp, g_ns`.
pub fn draw_channels<R: RngCore + ?Sized>(count: usize, rng: &mut R) -> ChannelDraw {
    let mut d = ChannelDraw {
        h_m: Vec::with_capacity(count),
        h_mp: Vec::with_capacity(count),
        g_ns: Vec::with_capacity(count),
    };
    for _ in 0..count {
        d.h_m.push(unit_exponential(rng));
        d.h_mp.push(unit_exponential(rng));
        d.g_ns.push(unit_exponential(rng));
    }
    d
}

/// Received SU power on one subcarrier.
pub fn received_power(lp: &LinkParams, h: f64, h_mp: f64) -> f64 {
    h * adapted_power(lp.su_power(), lp.psi(), h_mp)
}

/// SINR on a subcarrier shared with a PU of power `pu_power`.
pub fn sinr_shared(lp: &LinkParams, h: f64, h_mp: f64, g: f64) -> f64 {
    received_power(lp, h, h_mp) / (lp.pu_power() * g + lp.eta())
}

/// SINR on a free subcarrier.
pub fn sinr_free(lp: &LinkParams, h: f64, h_mp: f64) -> f64 {
    received_power(lp, h, h_mp) / lp.eta()
}

/// Capacity in nats of one SU whose subcarriers collide as in `kv`. The
/// first `k_1` draws serve PU 1, the next `k_2` PU 2 and so on; the
/// remaining draws are free subcarriers.
pub fn realize_capacity(cfg: &SystemConfig, kv: &CollisionVector, draws: &ChannelDraw) -> Result<f64> {
    if kv.per_pu.len() != cfg.num_pus() {
        return Err(Error::InvalidParameter("collision vector length differs from PU count"));
    }
    if draws.len() != kv.total() as usize {
        return Err(Error::InvalidParameter("draws must cover every allocated subcarrier"));
    }
    let mut i = 0;
    let mut c = 0.0;
    for (n, &k) in kv.per_pu.iter().enumerate() {
        let lp = cfg.link(n);
        for _ in 0..k {
            c += log1p(sinr_shared(&lp, draws.h_m[i], draws.h_mp[i], draws.g_ns[i]));
            i += 1;
        }
    }
    let lp = cfg.free_link();
    for _ in 0..kv.free {
        c += log1p(sinr_free(&lp, draws.h_m[i], draws.h_mp[i]));
        i += 1;
    }
    Ok(c)
}

/// One draw of the full chain: collision vector, then channels, then
/// capacity.
pub fn sample_capacity<R: RngCore + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<f64> {
    let kv = mvhypergeom_sample(cfg.su_subcarriers(), cfg.pool(), rng)?;
    let d = draw_channels(cfg.su_subcarriers() as usize, rng);
    realize_capacity(cfg, &kv, &d)
}

/// Draw of the received SU power.
pub fn sample_lambda<R: RngCore + ?Sized>(lp: &LinkParams, rng: &mut R) -> f64 {
    let h = unit_exponential(rng);
    let h_mp = unit_exponential(rng);
    received_power(lp, h, h_mp)
}

pub fn sample_sinr_interference<R: RngCore + ?Sized>(lp: &LinkParams, rng: &mut R) -> f64 {
    let h = unit_exponential(rng);
    let h_mp = unit_exponential(rng);
    let g = unit_exponential(rng);
    sinr_shared(lp, h, h_mp, g)
}

pub fn sample_sinr_nointerference<R: RngCore + ?Sized>(lp: &LinkParams, rng: &mut R) -> f64 {
    let h = unit_exponential(rng);
    let h_mp = unit_exponential(rng);
    sinr_free(lp, h, h_mp)
}

/// Draw of a sum of independent `Gamma(shape, scale)` variables.
pub fn sample_gamma_sum<R: RngCore + ?Sized>(components: &[(f64, f64)], rng: &mut R) -> Result<f64> {
    let mut s = 0.0;
    for &(shape, scale) in components {
        if shape == 0.0 {
            continue;
        }
        let g = Gamma::new(shape, scale).map_err(|_| Error::InvalidParameter("bad Gamma component"))?;
        s += g.sample(rng);
    }
    Ok(s)
}

/// Streaming mean and variance, mergeable across workers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        Self { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }
    pub fn mean(&self) -> f64 {
        self.mean
    }
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            sqrt(self.variance() / self.n as f64)
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// Sorted sample with ECDF and Kolmogorov–Smirnov utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

/// Equal-width histogram normalized to a density.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Fails on fewer than two samples, on NaN, and on all-equal samples.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter("need at least two samples"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidParameter("NaN sample"));
        }
        samples.sort_by(|a, b| a.total_cmp(b));
        if samples[0] == samples[samples.len() - 1] {
            return Err(Error::InvalidParameter("degenerate sample: all values equal"));
        }
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    fn quantile(&self, p: f64) -> f64 {
        let pos = p * (self.sorted.len() - 1) as f64;
        let i = floor(pos) as usize;
        let f = pos - i as f64;
        if i + 1 < self.sorted.len() {
            self.sorted[i] * (1.0 - f) + self.sorted[i + 1] * f
        } else {
            self.sorted[i]
        }
    }

    /// Histogram with Freedman–Diaconis bin width.
    pub fn histogram(&self) -> Histogram {
        let n = self.sorted.len() as f64;
        let iqr = self.quantile(0.75) - self.quantile(0.25);
        let (lo, hi) = (self.sorted[0], self.sorted[self.sorted.len() - 1]);
        let mut width = 2.0 * iqr / libm::cbrt(n);
        if !(width > 0.0) {
            width = (hi - lo) / libm::ceil(libm::sqrt(n));
        }
        let bins = (libm::ceil((hi - lo) / width) as usize).clamp(1, 10_000);
        self.histogram_with_edges((0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect())
    }

    /// Histogram on the given increasing edges.
    pub fn histogram_with_edges(&self, edges: Vec<f64>) -> Histogram {
        let n = self.sorted.len() as f64;
        let last = edges.len().saturating_sub(1);
        let density = edges
            .windows(2)
            .enumerate()
            .map(|(i, e)| {
                let a = self.sorted.partition_point(|v| *v < e[0]);
                let b = if i + 1 == last {
                    self.sorted.partition_point(|v| *v <= e[1])
                } else {
                    self.sorted.partition_point(|v| *v < e[1])
                };
                (b - a) as f64 / (n * (e[1] - e[0]))
            })
            .collect();
        Histogram { edges, density }
    }

    /// One-sample KS statistic against `cdf`.
    pub fn ks_statistic<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = cdf(x);
            d = d.max(fabs((i + 1) as f64 / n - f)).max(fabs(f - i as f64 / n));
        }
        d
    }

    /// Two-sample KS statistic.
    pub fn ks_two_sample(&self, other: &Self) -> f64 {
        let (a, b) = (&self.sorted, &other.sorted);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0, 0);
        let mut d: f64 = 0.0;
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max(fabs(i as f64 / na - j as f64 / nb));
        }
        d
    }

    /// Largest deviation of `cdf` outside the DKW band of half-width
    /// `epsilon`, zero when the band contains it everywhere.
    pub fn dkw_excess<F: Fn(f64) -> f64>(&self, cdf: F, epsilon: f64) -> f64 {
        (self.ks_statistic(cdf) - epsilon).max(0.0)
    }
}

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz band at confidence
/// `1 - alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    sqrt(libm::log(2.0 / alpha) / (2.0 * n as f64))
}

/// Pearson goodness-of-fit outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub samples: u64,
    pub cells: usize,
}

/// Pearson chi-square test of counts against cell probabilities. Adjacent
/// cells are pooled until each expected count reaches `min_expected`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<GofReport> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::InvalidParameter("observed and expected cells differ"));
    }
    let n: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&c, &p) in observed.iter().zip(probs) {
        o += c as f64;
        e += p * n as f64;
        if e >= min_expected {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 { 1.0 } else { regularized_gamma_q(dof as f64 / 2.0, statistic / 2.0)? };
    Ok(GofReport { statistic, dof, p_value, samples: n, cells: cells.len() })
}
