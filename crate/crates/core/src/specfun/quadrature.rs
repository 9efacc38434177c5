use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use libm::{cos, fabs, tan};

use crate::{Error, Result};

/// Nodes and weights of a quadrature rule. The domain depends on the
/// constructor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = super::KahanSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(*x));
        }
        acc.value()
    }

    /// Map a rule on `[-1, 1]` onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> QuadratureRule {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        QuadratureRule {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }

    /// Rule for `int_0^inf f(c s) c ds`, i.e. the same integral with the
    /// nodes stretched by `c`.
    pub fn scaled(&self, c: f64) -> QuadratureRule {
        QuadratureRule {
            nodes: self.nodes.iter().map(|x| x * c).collect(),
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }
}

/// Fejér's first rule on `[-1, 1]`: Chebyshev points `cos((2j-1)pi/2N)`,
/// ascending.
pub fn fejer_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidParameter("quadrature order must be positive"));
    }
    let n = order as f64;
    let mut pairs: Vec<(f64, f64)> = (1..=order)
        .map(|j| {
            let phi = (2 * j - 1) as f64 * PI / (2.0 * n);
            let mut s = 0.0;
            for k in 1..=order / 2 {
                let kf = k as f64;
                s += cos(2.0 * kf * phi) / (4.0 * kf * kf - 1.0);
            }
            (cos(phi), 2.0 / n * (1.0 - 2.0 * s))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    Ok(QuadratureRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}

/// Chebyshev-node rule on the half line: the Fejér rule pushed through
/// `s = tan(pi/4 (t+1))`.
pub fn gcq_rule(order: usize) -> Result<QuadratureRule> {
    let base = fejer_rule(order)?;
    let (nodes, weights) = base
        .nodes
        .iter()
        .zip(&base.weights)
        .map(|(t, w)| {
            let theta = PI / 4.0 * (t + 1.0);
            let c = cos(theta);
            (tan(theta), w * PI / 4.0 / (c * c))
        })
        .unzip();
    Ok(QuadratureRule { nodes, weights })
}

/// Integral estimate with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Segment { a, b, value: k * h, error: fabs((k - g) * h) }
}

const MAX_SEGMENTS: usize = 4000;

/// Adaptive Gauss–Kronrod (7/15) integration over a finite interval.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("adaptive integration needs finite limits"));
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    while error > abs_tol.max(rel_tol * fabs(value)) {
        if heap.len() >= MAX_SEGMENTS {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let l = kronrod(&mut f, worst.a, mid);
        let r = kronrod(&mut f, mid, worst.b);
        value += l.value + r.value - worst.value;
        error += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    // resum to shed accumulated drift
    let mut v = super::KahanSum::new();
    let mut e = 0.0;
    for s in heap.iter() {
        v.add(s.value);
        e += s.error;
    }
    let value = v.value();
    if !value.is_finite() {
        return Err(Error::Domain("integrand produced a non-finite value"));
    }
    Ok(Estimate { value, error: e, converged: e <= abs_tol.max(rel_tol * fabs(value)) })
}

/// Adaptive integration over `[a, inf)` through `x = a + scale t/(1-t)`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Estimate> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter("scale must be positive"));
    }
    integrate_adaptive(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - t;
            let v = f(a + scale * t / u) * scale / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}
