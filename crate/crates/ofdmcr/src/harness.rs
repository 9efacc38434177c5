//! Parallel replication driver with index-ordered reduction, and a cache
//! of per-link Gamma fits.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use ofdmcr_core::capmoments::{fit_link, LinkFits};
use ofdmcr_core::fading::LinkParams;
use ofdmcr_core::mcsim::{SeedSpec, StreamRng};
use ofdmcr_core::specfun::fejer_rule;
use rayon::prelude::*;

use crate::error::CliError;

pub const WORKERS_ENV: &str = "OFDMCR_WORKERS";

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
            b = b.num_threads(n);
        }
        b.build().expect("worker pool")
    })
}

/// Stream id of replication `rep` at sweep slot `slot`.
pub fn stream_id(slot: u64, rep: u64) -> u64 {
    (slot << 40) | rep
}

/// Run `f` once per replication on its own stream and return the results
/// in replication order, whatever the worker count.
pub fn replicate<T, F>(seed: u64, slot: u64, replications: u64, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T, CliError> + Sync,
{
    let master = SeedSpec::new(seed, 0);
    pool().install(|| {
        (0..replications).into_par_iter().map(|r| f(&mut master.with_stream(stream_id(slot, r)).rng())).collect()
    })
}

type FitKey = (u64, u64, u64, u64, usize);

/// Gamma fits per link, shared across sweep points and workers.
#[derive(Default)]
pub struct FitCache {
    map: RwLock<HashMap<FitKey, LinkFits>>,
}

impl FitCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fits(&self, lp: &LinkParams, order: usize) -> Result<LinkFits, CliError> {
        let key = (lp.su_power().to_bits(), lp.pu_power().to_bits(), lp.psi().to_bits(), lp.eta().to_bits(), order);
        if let Some(f) = self.map.read().expect("fit cache").get(&key) {
            return Ok(*f);
        }
        let f = fit_link(lp, &fejer_rule(order)?)?;
        self.map.write().expect("fit cache").insert(key, f);
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("fit cache").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
