//! Analytic capacity laws, collision statistics, extreme-value asymptotics
//! and Monte Carlo machinery for random subcarrier allocation in OFDM
//! cognitive radio networks.
//!
//! All powers are linear. Decibel conversion belongs to callers.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod capmoments;
pub mod collision;
pub mod error;
pub mod extremes;
pub mod fading;
pub mod law;
pub mod mcsim;
pub mod meancap;
pub mod moschopoulos;
pub mod scheduler;
pub mod specfun;
pub mod system;

pub use error::{Error, Result};
pub use law::ContinuousLaw;
