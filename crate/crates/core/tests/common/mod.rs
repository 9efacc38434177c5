#![allow(dead_code)]

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// `int_a^inf f` by Simpson on `x = a + t/(1-t)`.
pub fn simpson_half_line<F: Fn(f64) -> f64>(f: F, a: f64, n: usize) -> f64 {
    simpson(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - t;
            let v = f(a + t / u) / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        n,
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
