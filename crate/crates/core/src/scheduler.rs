//! Centralized sequential random subcarrier allocation with opportunistic
//! selection, and two baselines.

use alloc::vec;
use alloc::vec::Vec;

use libm::log1p;
use rand::{Rng, RngCore};

use crate::collision::{
    mvhypergeom_pmf, mvhypergeom_support, sequential_pmf, CollisionVector, Marginalization, SubcarrierPool,
};
use crate::extremes::{asymptotic_max_capacity, gumbel_params};
use crate::mcsim::{chi_square_gof, draw_channels, received_power, GofReport};
use crate::moschopoulos::{conditional_capacity_law, CapacityFits, SeriesOptions};
use crate::system::SystemConfig;
use crate::{Error, Result};

/// Bookkeeping of one sequential allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationState {
    pub free_set: Vec<u32>,
    /// Owner PU of each subcarrier, `None` when free of primary traffic.
    pub pu_occupancy: Vec<Option<usize>>,
    pub assigned: Vec<Vec<u32>>,
    pub selected: Vec<usize>,
}

impl AllocationState {
    /// Subcarriers `0..F`; PU `n` owns the `n`-th contiguous block.
    pub fn new(pool: &SubcarrierPool) -> Self {
        let mut occ = Vec::with_capacity(pool.total() as usize);
        for (n, &c) in pool.occupied().iter().enumerate() {
            occ.extend(core::iter::repeat_n(Some(n), c as usize));
        }
        occ.resize(pool.total() as usize, None);
        Self { free_set: (0..pool.total()).collect(), pu_occupancy: occ, assigned: Vec::new(), selected: Vec::new() }
    }

    /// Draw `count` subcarriers uniformly without replacement from the
    /// free set, leaving them in place.
    fn sample<R: RngCore + ?Sized>(&mut self, count: u32, rng: &mut R) -> Vec<u32> {
        let n = self.free_set.len();
        for i in 0..count as usize {
            let j = rng.random_range(i..n);
            self.free_set.swap(i, j);
        }
        self.free_set[..count as usize].to_vec()
    }

    fn commit(&mut self, su: usize, set: Vec<u32>) {
        self.free_set.retain(|s| !set.contains(s));
        self.assigned.push(set);
        self.selected.push(su);
    }

    /// Collision vector of a set of subcarriers.
    pub fn collisions(&self, set: &[u32], num_pus: usize) -> CollisionVector {
        let mut kv = CollisionVector::new(vec![0; num_pus], 0);
        for &s in set {
            match self.pu_occupancy[s as usize] {
                Some(n) => kv.per_pu[n] += 1,
                None => kv.free += 1,
            }
        }
        kv
    }

    /// Orthogonality and pool bookkeeping.
    pub fn check_invariants(&self, su_subcarriers: u32) -> Result<()> {
        let total = self.pu_occupancy.len();
        let mut seen = vec![false; total];
        for set in &self.assigned {
            if set.len() != su_subcarriers as usize {
                return Err(Error::Infeasible("assigned set of wrong size"));
            }
            for &s in set {
                if core::mem::replace(&mut seen[s as usize], true) {
                    return Err(Error::Infeasible("subcarrier assigned twice"));
                }
            }
        }
        for &s in &self.free_set {
            if core::mem::replace(&mut seen[s as usize], true) {
                return Err(Error::Infeasible("assigned subcarrier left in the free set"));
            }
        }
        if self.free_set.len() != total - self.assigned.len() * su_subcarriers as usize {
            return Err(Error::Infeasible("free set size out of step"));
        }
        let mut sel = self.selected.clone();
        sel.sort_unstable();
        if sel.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Infeasible("user selected twice"));
        }
        Ok(())
    }
}

/// Outcome of one scheduling run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult {
    pub selected: Vec<usize>,
    pub per_su_capacity: Vec<f64>,
    pub sum_capacity: f64,
    pub collision_log: Vec<CollisionVector>,
    /// Subcarrier set of each selected user, in selection order.
    pub assigned: Vec<Vec<u32>>,
}

fn check_run(cfg: &SystemConfig, users: usize, selections: usize, orthogonal: bool) -> Result<()> {
    if selections == 0 || selections > users {
        return Err(Error::InvalidParameter("selections must lie in 1..=users"));
    }
    if orthogonal && selections as u64 * cfg.su_subcarriers() as u64 > cfg.total() as u64 {
        return Err(Error::Infeasible("selections times SU subcarriers exceeds the pool"));
    }
    Ok(())
}

/// Per-subcarrier (received power, SINR denominator) of one user.
type LinkBudget = Vec<(f64, f64)>;

type Rounds = (AllocationState, Vec<LinkBudget>, Vec<CollisionVector>);

// Fresh gains for one user on `set`, returned as (received power, SINR
// denominator without SU interference) per subcarrier.
fn link_budget<R: RngCore + ?Sized>(
    cfg: &SystemConfig,
    state: &AllocationState,
    set: &[u32],
    rng: &mut R,
) -> LinkBudget {
    let d = draw_channels(set.len(), rng);
    let free = cfg.free_link();
    set.iter()
        .enumerate()
        .map(|(i, &s)| match state.pu_occupancy[s as usize] {
            Some(n) => {
                let lp = cfg.link(n);
                (received_power(&lp, d.h_m[i], d.h_mp[i]), lp.pu_power() * d.g_ns[i] + lp.eta())
            }
            None => (received_power(&free, d.h_m[i], d.h_mp[i]), free.eta()),
        })
        .collect()
}

fn capacity(budget: &[(f64, f64)]) -> f64 {
    budget.iter().map(|(p, d)| log1p(p / d)).sum()
}

fn finish(state: AllocationState, per_su: Vec<f64>, log: Vec<CollisionVector>) -> ScheduleResult {
    ScheduleResult {
        sum_capacity: per_su.iter().sum(),
        selected: state.selected,
        per_su_capacity: per_su,
        collision_log: log,
        assigned: state.assigned,
    }
}

// Rounds of: sample a set, offer it to the candidates, keep the best.
fn run_opportunistic_rounds<R: RngCore + ?Sized>(
    cfg: &SystemConfig,
    users: usize,
    selections: usize,
    rng: &mut R,
) -> Rounds {
    let mut state = AllocationState::new(cfg.pool());
    let mut budgets = Vec::with_capacity(selections);
    let mut log = Vec::with_capacity(selections);
    let mut taken = vec![false; users];
    for _ in 0..selections {
        let set = state.sample(cfg.su_subcarriers(), rng);
        let mut best: Option<(usize, f64, LinkBudget)> = None;
        for m in (0..users).filter(|&m| !taken[m]) {
            let b = link_budget(cfg, &state, &set, rng);
            let c = capacity(&b);
            if best.as_ref().is_none_or(|x| c > x.1) {
                best = Some((m, c, b));
            }
        }
        let (m, _, b) = best.expect("at least one candidate remains");
        taken[m] = true;
        log.push(state.collisions(&set, cfg.num_pus()));
        budgets.push(b);
        state.commit(m, set);
    }
    (state, budgets, log)
}

/// Opportunistic scheduling: each round a fresh random set is offered to
/// every unselected user and the user with the largest capacity on it
/// (lowest index on ties) takes it.
pub fn run_opportunistic<R: RngCore + ?Sized>(
    cfg: &SystemConfig,
    users: usize,
    selections: usize,
    rng: &mut R,
) -> Result<ScheduleResult> {
    check_run(cfg, users, selections, true)?;
    let (state, budgets, log) = run_opportunistic_rounds(cfg, users, selections, rng);
    debug_assert!(state.check_invariants(cfg.su_subcarriers()).is_ok());
    let per_su = budgets.iter().map(|b| capacity(b)).collect();
    Ok(finish(state, per_su, log))
}

/// Sequential orthogonal allocation to users `0, 1, 2, ...` in order.
pub fn run_arbitrary<R: RngCore + ?Sized>(
    cfg: &SystemConfig,
    users: usize,
    selections: usize,
    rng: &mut R,
) -> Result<ScheduleResult> {
    check_run(cfg, users, selections, true)?;
    let mut state = AllocationState::new(cfg.pool());
    let mut per_su = Vec::with_capacity(selections);
    let mut log = Vec::with_capacity(selections);
    for m in 0..selections {
        let set = state.sample(cfg.su_subcarriers(), rng);
        per_su.push(capacity(&link_budget(cfg, &state, &set, rng)));
        log.push(state.collisions(&set, cfg.num_pus()));
        state.commit(m, set);
    }
    debug_assert!(state.check_invariants(cfg.su_subcarriers()).is_ok());
    Ok(finish(state, per_su, log))
}

/// Users `0, 1, 2, ...` in order, each sampling its set from the full
/// pool. Users sharing a subcarrier interfere at the SBS with their
/// received power on it.
pub fn run_colliding_baseline<R: RngCore + ?Sized>(
    cfg: &SystemConfig,
    users: usize,
    selections: usize,
    rng: &mut R,
) -> Result<ScheduleResult> {
    check_run(cfg, users, selections, false)?;
    let mut state = AllocationState::new(cfg.pool());
    let mut budgets = Vec::with_capacity(selections);
    let mut log = Vec::with_capacity(selections);
    for m in 0..selections {
        let set = state.sample(cfg.su_subcarriers(), rng);
        budgets.push(link_budget(cfg, &state, &set, rng));
        log.push(state.collisions(&set, cfg.num_pus()));
        state.assigned.push(set);
        state.selected.push(m);
    }
    let mut per_su = Vec::with_capacity(selections);
    for (t, set) in state.assigned.iter().enumerate() {
        let mut c = 0.0;
        for (i, s) in set.iter().enumerate() {
            let (p, mut denom) = budgets[t][i];
            for (u, other) in state.assigned.iter().enumerate() {
                if u == t {
                    continue;
                }
                if let Some(j) = other.iter().position(|x| x == s) {
                    denom += budgets[u][j].0;
                }
            }
            c += log1p(p / denom);
        }
        per_su.push(c);
    }
    Ok(finish(state, per_su, log))
}

/// Empirical law of the collision vector of the `step`-th user (1-based)
/// under sequential orthogonal allocation, tested against the exact law.
/// Also fails when a run ever collides more often with a PU than it has
/// subcarriers.
pub fn stepwise_collision_pmf_check<R: RngCore + ?Sized>(
    pool: &SubcarrierPool,
    fs: &[u32],
    step: usize,
    samples: u64,
    rng: &mut R,
) -> Result<GofReport> {
    if step == 0 || step > fs.len() {
        return Err(Error::InvalidParameter("step must lie in 1..=number of users"));
    }
    if fs.iter().map(|&x| x as u64).sum::<u64>() > pool.total() as u64 {
        return Err(Error::Infeasible("users request more subcarriers than exist"));
    }
    // every vector reachable at a later step is also feasible at the first
    let mut support = mvhypergeom_support(fs[step - 1], pool);
    support.sort();
    let mut counts = vec![0u64; support.len()];
    for _ in 0..samples {
        let mut state = AllocationState::new(pool);
        let mut total = vec![0u32; pool.num_pus()];
        let mut last = None;
        for (m, &d) in fs.iter().enumerate() {
            let set = state.sample(d, rng);
            let kv = state.collisions(&set, pool.num_pus());
            for (t, k) in total.iter_mut().zip(&kv.per_pu) {
                *t += k;
            }
            state.commit(m, set);
            if m + 1 == step {
                last = Some(kv);
            }
        }
        if total.iter().zip(pool.occupied()).any(|(t, c)| t > c) {
            return Err(Error::Infeasible("collisions exceed primary occupancy"));
        }
        let kv = last.expect("step within range");
        let i = support.binary_search(&kv).map_err(|_| Error::Infeasible("collision vector outside support"))?;
        counts[i] += 1;
    }
    let opts = Marginalization::default();
    let probs: Result<Vec<f64>> =
        support.iter().map(|kv| sequential_pmf(step, fs, pool, kv, &opts).map(|p| p.probability)).collect();
    chi_square_gof(&counts, &probs?, 5.0)
}

/// Large-`M` approximation of the expected sum capacity of opportunistic
/// scheduling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumCapacityApproximation {
    pub value: f64,
    /// Set when `users < 4 * selections`, outside the intended regime.
    pub regime_warning: bool,
}

/// Expected best capacity among `users` on one common random set: the
/// Gumbel asymptote of each conditional capacity law, averaged over the
/// collision law of the set.
pub fn first_step_asymptote(cfg: &SystemConfig, fits: &CapacityFits, users: u32, opts: &SeriesOptions) -> Result<f64> {
    let fs = cfg.su_subcarriers();
    let mut acc = 0.0;
    for kv in mvhypergeom_support(fs, cfg.pool()) {
        let p = mvhypergeom_pmf(fs, cfg.pool(), &kv)?;
        if p == 0.0 {
            continue;
        }
        let law = conditional_capacity_law(fits, &kv, opts)?;
        acc += p * asymptotic_max_capacity(&gumbel_params(&law, users)?);
    }
    Ok(acc)
}

/// `M_hat` times [`first_step_asymptote`].
pub fn sum_capacity_approximation(
    cfg: &SystemConfig,
    fits: &CapacityFits,
    users: u32,
    selections: u32,
    opts: &SeriesOptions,
) -> Result<SumCapacityApproximation> {
    if selections == 0 || selections > users {
        return Err(Error::InvalidParameter("selections must lie in 1..=users"));
    }
    let one = first_step_asymptote(cfg, fits, users, opts)?;
    Ok(SumCapacityApproximation { value: selections as f64 * one, regime_warning: users < 4 * selections })
}
