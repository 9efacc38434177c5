//! Quick invariant suite behind the `selftest` subcommand.

use ofdmcr_core::capmoments::{db_to_linear, fit_link};
use ofdmcr_core::collision::{hypergeom_pmf, mvhypergeom_pmf, mvhypergeom_support, SubcarrierPool};
use ofdmcr_core::extremes::gumbel_params;
use ofdmcr_core::fading::LinkParams;
use ofdmcr_core::mcsim::SeedSpec;
use ofdmcr_core::moschopoulos::MoschopoulosSeries;
use ofdmcr_core::scheduler::run_opportunistic;
use ofdmcr_core::specfun::fejer_rule;
use ofdmcr_core::system::SystemConfig;

use crate::experiments::Check;

fn check(name: &str, f: impl FnOnce() -> Result<(bool, String), ofdmcr_core::Error>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name: name.into(), passed, detail },
        Err(e) => Check { name: name.into(), passed: false, detail: e.to_string() },
    }
}

pub fn run_selftest() -> Vec<Check> {
    vec![
        check("hypergeometric pmf sums to one", || {
            let s: f64 = (0..=10).map(|k| hypergeom_pmf(10, 40, 100, k)).sum::<Result<f64, _>>()?;
            Ok(((s - 1.0).abs() < 1e-12, format!("sum {s}")))
        }),
        check("multivariate pmf sums to one", || {
            let pool = SubcarrierPool::new(60, vec![10, 15, 5])?;
            let mut s = 0.0;
            for kv in mvhypergeom_support(12, &pool) {
                s += mvhypergeom_pmf(12, &pool, &kv)?;
            }
            Ok(((s - 1.0).abs() < 1e-10, format!("sum {s}")))
        }),
        check("two-exponential series closed form", || {
            let s = MoschopoulosSeries::build(&[(1.0, 1.0), (1.0, 2.0)], 60)?;
            let y: f64 = 1.7;
            let want = (-y / 2.0).exp() - (-y).exp();
            let got = s.pdf(y);
            Ok(((got - want).abs() < 1e-8, format!("{got} vs {want}")))
        }),
        check("unit exponential Gumbel constants", || {
            let e = ofdmcr_core::capmoments::GammaParams::new(1.0, 1.0)?;
            let g = gumbel_params(&e, 1000)?;
            Ok((
                (g.location - 1000f64.ln()).abs() < 1e-10 && (g.scale - 1.0).abs() < 1e-10,
                format!("b {} a {}", g.location, g.scale),
            ))
        }),
        check("gamma fit preserves the mean", || {
            let lp = LinkParams::new(100.0, 10.0, 1.0, 1.0)?;
            let f = fit_link(&lp, &fejer_rule(50)?)?;
            let m = f.interference.mean();
            Ok(((m - 0.348_560_316_678_005_7).abs() < 1e-9, format!("{m}")))
        }),
        check("scheduler keeps assignments orthogonal", || {
            let pool = SubcarrierPool::new(100, vec![40])?;
            let cfg = SystemConfig::new(pool, 10, db_to_linear(10.0), vec![10.0], 1.0, 1.0)?;
            let seed = SeedSpec::new(1, 0);
            for i in 0..500 {
                let r = run_opportunistic(&cfg, 12, 10, &mut seed.with_stream(i).rng())?;
                let mut seen = [false; 100];
                for s in r.assigned.iter().flatten() {
                    if std::mem::replace(&mut seen[*s as usize], true) {
                        return Ok((false, format!("run {i} reuses subcarrier {s}")));
                    }
                }
            }
            Ok((true, "500 runs".into()))
        }),
    ]
}
