//! Collision statistics of random subcarrier selection against primary
//! users.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, sqrt};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::specfun::ln_choose;
use crate::{Error, Result};

/// Partition of `F` subcarriers into primary-user blocks and a free block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcarrierPool {
    total: u32,
    occupied: Vec<u32>,
}

impl SubcarrierPool {
    pub fn new(total: u32, occupied: Vec<u32>) -> Result<Self> {
        if total == 0 {
            return Err(Error::InvalidParameter("pool must contain subcarriers"));
        }
        let used: u64 = occupied.iter().map(|&x| x as u64).sum();
        if used > total as u64 {
            return Err(Error::InvalidParameter("primary users occupy more than the pool"));
        }
        Ok(Self { total, occupied })
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn occupied(&self) -> &[u32] {
        &self.occupied
    }

    pub fn num_pus(&self) -> usize {
        self.occupied.len()
    }

    pub fn free(&self) -> u32 {
        self.total - self.occupied.iter().sum::<u32>()
    }

    /// Block capacities: one per primary user followed by the free block.
    fn caps(&self) -> Vec<u32> {
        let mut c = self.occupied.clone();
        c.push(self.free());
        c
    }
}

/// Number of collisions with each primary user plus the number of free
/// subcarriers obtained.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CollisionVector {
    pub per_pu: Vec<u32>,
    pub free: u32,
}

impl CollisionVector {
    pub fn new(per_pu: Vec<u32>, free: u32) -> Self {
        Self { per_pu, free }
    }

    pub fn total(&self) -> u32 {
        self.per_pu.iter().sum::<u32>() + self.free
    }

    pub fn collisions(&self) -> u32 {
        self.per_pu.iter().sum()
    }

    fn from_blocks(b: &[u32]) -> Self {
        let (pu, f) = b.split_at(b.len() - 1);
        Self { per_pu: pu.to_vec(), free: f[0] }
    }

    fn blocks(&self) -> Vec<u32> {
        let mut b = self.per_pu.clone();
        b.push(self.free);
        b
    }
}

fn check_draws(draws: u32, population: u32) -> Result<()> {
    if draws > population {
        return Err(Error::InvalidParameter("more draws than subcarriers"));
    }
    Ok(())
}

/// Support `[lo, hi]` of the hypergeometric law.
pub fn hypergeom_support(draws: u32, successes: u32, population: u32) -> (u32, u32) {
    let lo = (draws + successes).saturating_sub(population);
    (lo, draws.min(successes))
}

/// Probability of `k` collisions when `draws` subcarriers are taken without
/// replacement from `population` of which `successes` are occupied.
pub fn hypergeom_pmf(draws: u32, successes: u32, population: u32, k: u32) -> Result<f64> {
    check_draws(draws, population)?;
    if successes > population {
        return Err(Error::InvalidParameter("occupied count exceeds population"));
    }
    let (lo, hi) = hypergeom_support(draws, successes, population);
    if k < lo || k > hi {
        return Ok(0.0);
    }
    let (n, s, d, k) = (population as u64, successes as u64, draws as u64, k as u64);
    Ok(exp(ln_choose(s, k) + ln_choose(n - s, d - k) - ln_choose(n, d)))
}

pub fn hypergeom_mean(draws: u32, successes: u32, population: u32) -> Result<f64> {
    check_draws(draws, population)?;
    if successes > population {
        return Err(Error::InvalidParameter("occupied count exceeds population"));
    }
    Ok(draws as f64 * successes as f64 / population as f64)
}

/// Inversion sampler using one uniform variate.
pub fn sample_hypergeom<R: RngCore + ?Sized>(draws: u32, successes: u32, population: u32, rng: &mut R) -> u32 {
    let (lo, hi) = hypergeom_support(draws, successes, population);
    if lo == hi {
        return lo;
    }
    let u: f64 = rng.random();
    let (n, s, d) = (population as f64, successes as f64, draws as f64);
    let mut p = hypergeom_pmf(draws, successes, population, lo).unwrap_or(0.0);
    let mut cum = p;
    let mut k = lo;
    while cum <= u && k < hi {
        let kf = k as f64;
        p *= (s - kf) * (d - kf) / ((kf + 1.0) * (n - s - d + kf + 1.0));
        k += 1;
        cum += p;
    }
    k
}

fn ln_mv_pmf(draws: u32, caps: &[u32], total: u32, k: &[u32]) -> f64 {
    let mut l = -ln_choose(total as u64, draws as u64);
    for (&c, &x) in caps.iter().zip(k) {
        if x > c {
            return f64::NEG_INFINITY;
        }
        l += ln_choose(c as u64, x as u64);
    }
    l
}

/// Joint law of collisions with each primary user when `draws` subcarriers
/// are chosen uniformly from the pool.
pub fn mvhypergeom_pmf(draws: u32, pool: &SubcarrierPool, kv: &CollisionVector) -> Result<f64> {
    check_draws(draws, pool.total())?;
    if kv.per_pu.len() != pool.num_pus() {
        return Err(Error::InvalidParameter("collision vector length differs from PU count"));
    }
    if kv.total() != draws {
        return Ok(0.0);
    }
    Ok(exp(ln_mv_pmf(draws, &pool.caps(), pool.total(), &kv.blocks())))
}

fn visit_support<F: FnMut(&[u32])>(draws: u32, caps: &[u32], f: &mut F) {
    fn go<F: FnMut(&[u32])>(i: usize, left: u32, caps: &[u32], tail: &[u64], cur: &mut Vec<u32>, f: &mut F) {
        if i == caps.len() {
            if left == 0 {
                f(cur);
            }
            return;
        }
        let lo = (left as u64).saturating_sub(tail[i + 1]) as u32;
        let hi = left.min(caps[i]);
        for k in lo..=hi {
            cur[i] = k;
            go(i + 1, left - k, caps, tail, cur, f);
        }
    }
    let mut tail = vec![0u64; caps.len() + 1];
    for i in (0..caps.len()).rev() {
        tail[i] = tail[i + 1] + caps[i] as u64;
    }
    if (draws as u64) > tail[0] {
        return;
    }
    let mut cur = vec![0u32; caps.len()];
    go(0, draws, caps, &tail, &mut cur, f);
}

/// All feasible collision vectors.
pub fn mvhypergeom_support(draws: u32, pool: &SubcarrierPool) -> Vec<CollisionVector> {
    let mut out = Vec::new();
    visit_support(draws, &pool.caps(), &mut |b| out.push(CollisionVector::from_blocks(b)));
    out
}

/// Number of feasible collision vectors, as a float to survive large pools.
pub fn mvhypergeom_support_size(draws: u32, pool: &SubcarrierPool) -> f64 {
    let d = draws as usize;
    let mut ways = vec![0.0f64; d + 1];
    ways[0] = 1.0;
    for &c in &pool.caps() {
        let mut next = vec![0.0f64; d + 1];
        for (r, w) in ways.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for k in 0..=(c as usize).min(d - r) {
                next[r + k] += w;
            }
        }
        ways = next;
    }
    ways[d]
}

/// Sequential draw: each primary block in turn, free block takes the rest.
pub fn mvhypergeom_sample<R: RngCore + ?Sized>(
    draws: u32,
    pool: &SubcarrierPool,
    rng: &mut R,
) -> Result<CollisionVector> {
    check_draws(draws, pool.total())?;
    Ok(CollisionVector::from_blocks(&sample_blocks(draws, &pool.caps(), rng)))
}

fn sample_blocks<R: RngCore + ?Sized>(draws: u32, caps: &[u32], rng: &mut R) -> Vec<u32> {
    let mut rest: u32 = caps.iter().sum();
    let mut left = draws;
    let mut out = Vec::with_capacity(caps.len());
    for &c in &caps[..caps.len() - 1] {
        let k = sample_hypergeom(left, c, rest, rng);
        out.push(k);
        left -= k;
        rest -= c;
    }
    out.push(left);
    out
}

/// Controls exact marginalization over earlier users and its Monte Carlo
/// fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginalization {
    pub max_terms: u64,
    pub fallback_samples: u32,
    pub seed: u64,
}

impl Default for Marginalization {
    fn default() -> Self {
        Self { max_terms: 10_000_000, fallback_samples: 200_000, seed: 0x5eed }
    }
}

/// A probability, exact when `std_error` is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmfEstimate {
    pub probability: f64,
    pub std_error: Option<f64>,
}

fn check_sequence(step: usize, fs: &[u32], pool: &SubcarrierPool) -> Result<()> {
    if step == 0 || step > fs.len() {
        return Err(Error::InvalidParameter("step must lie in 1..=number of users"));
    }
    let used: u64 = fs[..step].iter().map(|&x| x as u64).sum();
    if used > pool.total() as u64 {
        return Err(Error::InvalidParameter("users request more subcarriers than exist"));
    }
    Ok(())
}

/// Law of the collision vector of the `step`-th user (1-based) when users
/// select in turn and each removes its subcarriers from the pool.
pub fn sequential_pmf(
    step: usize,
    fs: &[u32],
    pool: &SubcarrierPool,
    kv: &CollisionVector,
    opts: &Marginalization,
) -> Result<PmfEstimate> {
    check_sequence(step, fs, pool)?;
    if kv.per_pu.len() != pool.num_pus() {
        return Err(Error::InvalidParameter("collision vector length differs from PU count"));
    }
    let target = kv.blocks();
    let mut states: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    states.insert(pool.caps(), 1.0);
    let mut terms = 0u64;
    for &d in &fs[..step - 1] {
        let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (caps, p) in &states {
            let total: u32 = caps.iter().sum();
            let mut overflow = false;
            visit_support(d, caps, &mut |k| {
                terms += 1;
                if terms > opts.max_terms {
                    overflow = true;
                    return;
                }
                let q = exp(ln_mv_pmf(d, caps, total, k));
                let rem: Vec<u32> = caps.iter().zip(k).map(|(c, x)| c - x).collect();
                *next.entry(rem).or_insert(0.0) += p * q;
            });
            if overflow {
                return Ok(sequential_pmf_mc(step, fs, pool, &target, opts));
            }
        }
        states = next;
    }
    let d = fs[step - 1];
    if target.iter().sum::<u32>() != d {
        return Ok(PmfEstimate { probability: 0.0, std_error: None });
    }
    let mut acc = crate::specfun::KahanSum::new();
    for (caps, p) in &states {
        let total: u32 = caps.iter().sum();
        acc.add(p * exp(ln_mv_pmf(d, caps, total, &target)));
    }
    Ok(PmfEstimate { probability: acc.value(), std_error: None })
}

fn sequential_pmf_mc(
    step: usize,
    fs: &[u32],
    pool: &SubcarrierPool,
    target: &[u32],
    opts: &Marginalization,
) -> PmfEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.fallback_samples.max(1);
    let mut hits = 0u32;
    for _ in 0..n {
        let mut caps = pool.caps();
        let mut last = Vec::new();
        for &d in &fs[..step] {
            last = sample_blocks(d, &caps, &mut rng);
            for (c, x) in caps.iter_mut().zip(&last) {
                *c -= x;
            }
        }
        if last == target {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    PmfEstimate { probability: p, std_error: Some(sqrt(p * (1.0 - p) / n as f64)) }
}

/// Expected collisions of every user with every primary user, indexed
/// `[user][pu]`.
pub fn sequential_mean(fs: &[u32], pool: &SubcarrierPool) -> Result<Vec<Vec<f64>>> {
    if !fs.is_empty() {
        check_sequence(fs.len(), fs, pool)?;
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(fs.len());
    let mut taken = vec![0.0f64; pool.num_pus()];
    let mut removed = 0u64;
    for &d in fs {
        let left = (pool.total() as u64 - removed) as f64;
        let row: Vec<f64> =
            pool.occupied().iter().zip(&taken).map(|(&c, t)| d as f64 * (c as f64 - t) / left).collect();
        for (t, r) in taken.iter_mut().zip(&row) {
            *t += r;
        }
        removed += d as u64;
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypergeom_small_table() {
        // 3 draws from 10 with 4 occupied: C(4,k) C(6,3-k) / 120
        let want = [20.0, 60.0, 36.0, 4.0];
        for (k, w) in want.iter().enumerate() {
            let p = hypergeom_pmf(3, 4, 10, k as u32).unwrap();
            assert!((p - w / 120.0).abs() < 1e-15);
        }
        assert_eq!(hypergeom_pmf(3, 4, 10, 4).unwrap(), 0.0);
        assert!(hypergeom_pmf(11, 4, 10, 0).is_err());
    }

    #[test]
    fn support_enumeration_matches_count() {
        let pool = SubcarrierPool::new(12, vec![3, 4]).unwrap();
        for d in 0..=12 {
            let s = mvhypergeom_support(d, &pool);
            assert_eq!(s.len() as f64, mvhypergeom_support_size(d, &pool));
            let total: f64 = s.iter().map(|k| mvhypergeom_pmf(d, &pool, k).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn sequential_first_step_is_plain_law() {
        let pool = SubcarrierPool::new(10, vec![4]).unwrap();
        let kv = CollisionVector::new(vec![2], 1);
        let p = sequential_pmf(1, &[3, 3], &pool, &kv, &Marginalization::default()).unwrap();
        assert_eq!(p.std_error, None);
        assert!((p.probability - 36.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn sequential_second_step_by_hand() {
        // pool 4 with 2 occupied, each user takes 1
        let pool = SubcarrierPool::new(4, vec![2]).unwrap();
        let kv = CollisionVector::new(vec![1], 0);
        let p = sequential_pmf(2, &[1, 1], &pool, &kv, &Marginalization::default()).unwrap();
        // 1/2 * 1/3 + 1/2 * 2/3
        assert!((p.probability - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fallback_reports_error() {
        let pool = SubcarrierPool::new(10, vec![4]).unwrap();
        let kv = CollisionVector::new(vec![1], 2);
        let opts = Marginalization { max_terms: 1, fallback_samples: 50_000, seed: 7 };
        let exact = sequential_pmf(3, &[3, 3, 3], &pool, &kv, &Marginalization::default()).unwrap();
        let mc = sequential_pmf(3, &[3, 3, 3], &pool, &kv, &opts).unwrap();
        let se = mc.std_error.unwrap();
        assert!((mc.probability - exact.probability).abs() < 5.0 * se);
    }
}
