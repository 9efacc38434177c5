//! Special functions, root finding and quadrature.

mod gamma;
mod inverse;
mod quadrature;

pub use gamma::{
    exp_integral_e1, ln_choose, ln_gamma, regularized_gamma_p, regularized_gamma_p_leading_term, regularized_gamma_pq,
    regularized_gamma_q, scaled_exp_integral_e1, upper_incomplete_gamma, Saturating,
};
pub use inverse::{inverse_leading_term, inverse_regularized_gamma_p};
pub use quadrature::{fejer_rule, gcq_rule, integrate_adaptive, integrate_semi_infinite, Estimate, QuadratureRule};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
