//! Network configuration shared by the analytic and simulated models.

use alloc::vec::Vec;

use crate::collision::SubcarrierPool;
use crate::fading::LinkParams;
use crate::{Error, Result};

/// One secondary link sharing `F` subcarriers with `N` primary users.
/// Powers are linear.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pool: SubcarrierPool,
    su_subcarriers: u32,
    su_power: f64,
    pu_powers: Vec<f64>,
    psi: f64,
    eta: f64,
}

impl SystemConfig {
    pub fn new(
        pool: SubcarrierPool,
        su_subcarriers: u32,
        su_power: f64,
        pu_powers: Vec<f64>,
        psi: f64,
        eta: f64,
    ) -> Result<Self> {
        if su_subcarriers == 0 || su_subcarriers > pool.total() {
            return Err(Error::InvalidParameter("SU subcarrier count must lie in 1..=F"));
        }
        if pu_powers.len() != pool.num_pus() {
            return Err(Error::InvalidParameter("one PU power per primary user required"));
        }
        for &p in &pu_powers {
            LinkParams::new(su_power, p, psi, eta)?;
        }
        if pu_powers.is_empty() {
            LinkParams::new(su_power, 1.0, psi, eta)?;
        }
        Ok(Self { pool, su_subcarriers, su_power, pu_powers, psi, eta })
    }

    pub fn pool(&self) -> &SubcarrierPool {
        &self.pool
    }
    pub fn total(&self) -> u32 {
        self.pool.total()
    }
    pub fn su_subcarriers(&self) -> u32 {
        self.su_subcarriers
    }
    pub fn su_power(&self) -> f64 {
        self.su_power
    }
    pub fn pu_powers(&self) -> &[f64] {
        &self.pu_powers
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn num_pus(&self) -> usize {
        self.pool.num_pus()
    }

    /// Link parameters against primary user `n`.
    pub fn link(&self, n: usize) -> LinkParams {
        LinkParams::new(self.su_power, self.pu_powers[n], self.psi, self.eta).expect("validated at construction")
    }

    /// Link parameters for a free subcarrier. The PU power is irrelevant
    /// there and set to one.
    pub fn free_link(&self) -> LinkParams {
        LinkParams::new(self.su_power, 1.0, self.psi, self.eta).expect("validated at construction")
    }
}
