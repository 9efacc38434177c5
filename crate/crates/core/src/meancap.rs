//! Average capacity of random subcarrier allocation and its bounds.

use alloc::vec::Vec;

use libm::fabs;

use crate::capmoments::{mean_capacity_interference, mean_capacity_nointerference};
use crate::collision::SubcarrierPool;
use crate::system::SystemConfig;
use crate::{Error, Result};

/// Per-subcarrier mean capacities: one per primary user on shared
/// subcarriers plus the free-subcarrier value.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMeans {
    pub interference: Vec<f64>,
    pub nointerference: f64,
}

pub fn channel_means(cfg: &SystemConfig) -> Result<ChannelMeans> {
    let mut interference: Vec<f64> = Vec::with_capacity(cfg.num_pus());
    for n in 0..cfg.num_pus() {
        let p = cfg.pu_powers()[n];
        let v = match cfg.pu_powers()[..n].iter().position(|&q| q == p) {
            Some(j) => interference[j],
            None => mean_capacity_interference(&cfg.link(n))?,
        };
        interference.push(v);
    }
    Ok(ChannelMeans { interference, nointerference: mean_capacity_nointerference(&cfg.free_link())? })
}

fn check_means(cfg: &SystemConfig, m: &ChannelMeans) -> Result<()> {
    if m.interference.len() != cfg.num_pus() {
        return Err(Error::InvalidParameter("one interference mean per primary user required"));
    }
    Ok(())
}

/// Average capacity when only primary user `n` is present.
pub fn avg_capacity_single_pu_with(cfg: &SystemConfig, n: usize, m: &ChannelMeans) -> Result<f64> {
    check_means(cfg, m)?;
    if n >= cfg.num_pus() {
        return Err(Error::InvalidParameter("primary user index out of range"));
    }
    let fs = cfg.su_subcarriers() as f64;
    let share = cfg.pool().occupied()[n] as f64 / cfg.total() as f64;
    Ok(fs * (share * m.interference[n] + (1.0 - share) * m.nointerference))
}

pub fn avg_capacity_single_pu(cfg: &SystemConfig, n: usize) -> Result<f64> {
    avg_capacity_single_pu_with(cfg, n, &channel_means(cfg)?)
}

/// Average capacity with all primary users present.
pub fn avg_capacity_multi_pu_with(cfg: &SystemConfig, m: &ChannelMeans) -> Result<f64> {
    check_means(cfg, m)?;
    let f = cfg.total() as f64;
    let mut acc = cfg.pool().free() as f64 * m.nointerference;
    for (&occ, &ci) in cfg.pool().occupied().iter().zip(&m.interference) {
        acc += occ as f64 * ci;
    }
    Ok(cfg.su_subcarriers() as f64 * acc / f)
}

pub fn avg_capacity_multi_pu(cfg: &SystemConfig) -> Result<f64> {
    avg_capacity_multi_pu_with(cfg, &channel_means(cfg)?)
}

/// Naive bounds assume every subcarrier may be shared or free; tight
/// bounds respect the feasible collision counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBounds {
    pub naive_lower: f64,
    pub naive_upper: f64,
    pub tight_lower: f64,
    pub tight_upper: f64,
}

/// Bounds with primary user `n` alone.
pub fn capacity_bounds_with(cfg: &SystemConfig, n: usize, m: &ChannelMeans) -> Result<CapacityBounds> {
    check_means(cfg, m)?;
    if n >= cfg.num_pus() {
        return Err(Error::InvalidParameter("primary user index out of range"));
    }
    let pool = SubcarrierPool::new(cfg.total(), alloc::vec![cfg.pool().occupied()[n]])?;
    Ok(greedy_bounds(cfg.su_subcarriers(), &pool, &[m.interference[n]], m.nointerference))
}

pub fn capacity_bounds(cfg: &SystemConfig, n: usize) -> Result<CapacityBounds> {
    capacity_bounds_with(cfg, n, &channel_means(cfg)?)
}

/// Bounds with all primary users present.
pub fn capacity_bounds_multi_pu_with(cfg: &SystemConfig, m: &ChannelMeans) -> Result<CapacityBounds> {
    check_means(cfg, m)?;
    Ok(greedy_bounds(cfg.su_subcarriers(), cfg.pool(), &m.interference, m.nointerference))
}

pub fn capacity_bounds_multi_pu(cfg: &SystemConfig) -> Result<CapacityBounds> {
    capacity_bounds_multi_pu_with(cfg, &channel_means(cfg)?)
}

// Extremes of sum_b k_b v_b over 0 <= k_b <= cap_b, sum k_b = fs. Filling
// the cheapest (dearest) blocks first is optimal.
fn greedy_bounds(fs: u32, pool: &SubcarrierPool, ci: &[f64], cni: f64) -> CapacityBounds {
    let mut blocks: Vec<(f64, u32)> = ci.iter().copied().zip(pool.occupied().iter().copied()).collect();
    blocks.push((cni, pool.free()));
    blocks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let fill = |order: &mut dyn Iterator<Item = &(f64, u32)>| {
        let mut left = fs;
        let mut acc = 0.0;
        for &(v, c) in order {
            let k = left.min(c);
            acc += k as f64 * v;
            left -= k;
        }
        acc
    };
    let lo = fill(&mut blocks.iter());
    let hi = fill(&mut blocks.iter().rev());
    let vmin = blocks.iter().filter(|b| b.1 > 0).map(|b| b.0).fold(f64::INFINITY, f64::min);
    let vmax = blocks.iter().filter(|b| b.1 > 0).map(|b| b.0).fold(f64::NEG_INFINITY, f64::max);
    CapacityBounds { naive_lower: fs as f64 * vmin, naive_upper: fs as f64 * vmax, tight_lower: lo, tight_upper: hi }
}

/// One row of the convergence diagnostic of the average capacity viewed as
/// a sequence in `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub total: u32,
    pub capacity: f64,
    /// `|A(F+2) - A(F+1)| / |A(F+1) - A(F)|`
    pub step_ratio: Option<f64>,
    /// `|A(F+1) - A| / |A(F) - A|` with `A` the large-`F` limit.
    pub error_ratio: Option<f64>,
}

/// Average capacity against primary user `n` along a grid of pool sizes,
/// keeping `F^P` and `F_s` fixed.
pub fn convergence_diagnostic(cfg: &SystemConfig, n: usize, grid: &[u32]) -> Result<Vec<ConvergencePoint>> {
    let m = channel_means(cfg)?;
    let occ = *cfg.pool().occupied().get(n).ok_or(Error::InvalidParameter("primary user index out of range"))?;
    let fs = cfg.su_subcarriers();
    let at = |f: u32| -> Result<f64> {
        let pool = SubcarrierPool::new(f, alloc::vec![occ])?;
        let c = SystemConfig::new(pool, fs, cfg.su_power(), alloc::vec![cfg.pu_powers()[n]], cfg.psi(), cfg.eta())?;
        avg_capacity_single_pu_with(
            &c,
            0,
            &ChannelMeans { interference: alloc::vec![m.interference[n]], nointerference: m.nointerference },
        )
    };
    let limit = fs as f64 * m.nointerference;
    let ratio = |num: f64, den: f64| if den == 0.0 { None } else { Some(num / den) };
    grid.iter()
        .map(|&f| {
            let (a0, a1, a2) = (at(f)?, at(f + 1)?, at(f + 2)?);
            Ok(ConvergencePoint {
                total: f,
                capacity: a0,
                step_ratio: ratio(fabs(a2 - a1), fabs(a1 - a0)),
                error_ratio: ratio(fabs(a1 - limit), fabs(a0 - limit)),
            })
        })
        .collect()
}
