mod common;

use common::rel;
use ofdmcr_core::capmoments::{db_to_linear, fit_link, GammaParams, DEFAULT_RULE_ORDER};
use ofdmcr_core::collision::{mvhypergeom_sample, Marginalization, SubcarrierPool};
use ofdmcr_core::extremes::*;
use ofdmcr_core::moschopoulos::*;
use ofdmcr_core::specfun::fejer_rule;
use ofdmcr_core::system::SystemConfig;
use ofdmcr_core::ContinuousLaw;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, Gamma};

struct Shifted<L>(L, f64);

impl<L: ContinuousLaw> ContinuousLaw for Shifted<L> {
    fn pdf(&self, x: f64) -> f64 {
        self.0.pdf(x - self.1)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x - self.1)
    }
    fn sf(&self, x: f64) -> f64 {
        self.0.sf(x - self.1)
    }
}

#[test]
fn unit_exponential_closed_forms() {
    let e = GammaParams::new(1.0, 1.0).unwrap();
    for m in [2u32, 10, 100, 1000, 100_000] {
        let gp = gumbel_params(&e, m).unwrap();
        assert!((gp.location - (m as f64).ln()).abs() < 1e-10);
        assert!((gp.scale - 1.0).abs() < 1e-10);
    }
    let gp = gumbel_params(&e, 100).unwrap();
    assert!((gp.location - 4.60517).abs() < 1e-5);
    let a = asymptotic_max_capacity(&gp);
    assert!((a - 5.18238).abs() < 1e-5);
    // harmonic number H_100
    let h: f64 = (1..=100).map(|i| 1.0 / i as f64).sum();
    assert!((h - a).abs() < 1.0 / 200.0);
    assert!(gumbel_params(&e, 1).is_err());
}

#[test]
fn degenerate_scale_gives_location() {
    let gp = GumbelParams { location: 3.0, scale: 0.0, users: 10 };
    assert_eq!(asymptotic_max_capacity(&gp), 3.0);
}

#[test]
fn growth_function_of_single_gammas() {
    let s = MoschopoulosSeries::build(&[(1.0, 1.7)], 25).unwrap();
    for p in von_mises_check(&s, &[0.5, 3.0, 20.0], 1e-6) {
        assert!(rel(p.value.unwrap(), 1.7) < 1e-12);
    }
    let s = MoschopoulosSeries::build(&[(3.0, 2.0)], 25).unwrap();
    let pts = von_mises_check(&s, &[10.0, 50.0, 200.0], 1e-6);
    let last = pts.last().unwrap().value.as_ref().copied().unwrap();
    assert!(rel(last, 2.0) < 0.05);
    // exact growth function of Gamma(3, 2): 2 (1 + t + t^2/2) / (t^2/2), t = x/2
    for p in &pts {
        let t = p.x / 2.0;
        let g = 2.0 * (1.0 + t + t * t / 2.0) / (t * t / 2.0);
        assert!(rel(*p.value.as_ref().unwrap(), g) < 1e-9);
    }
}

#[test]
fn growth_function_follows_the_largest_scale() {
    let s = MoschopoulosSeries::with_tolerance(
        &[(1.0, 1.0), (1.0, 2.0)],
        &SeriesOptions { tolerance: 1e-14, ..Default::default() },
    )
    .unwrap();
    let grid = [1.0, 5.0, 10.0, 20.0, 25.0, 200.0];
    let pts = von_mises_check(&s, &grid, 1e-6);
    let mut last_ok = None;
    for p in &pts {
        let y = p.x;
        let exact = (2.0 * (-y / 2.0).exp() - (-y).exp()) / ((-y / 2.0).exp() - (-y).exp());
        if let Ok(v) = p.value {
            assert!(rel(v, exact) < 1e-6, "{y}");
            last_ok = Some(v);
        }
    }
    // far beyond where the truncated series is trustworthy
    assert!(pts.last().unwrap().value.is_err());
    let v = last_ok.unwrap();
    assert!(rel(v, 2.0) < 0.05, "{v}");
    assert!(rel(v, s.beta_min()) > 0.5);
}

#[test]
fn shift_moves_location_only() {
    let g = GammaParams::new(2.5, 0.7).unwrap();
    for m in [5u32, 50, 500] {
        let a = gumbel_params(&g, m).unwrap();
        let b = gumbel_params(&Shifted(g, 3.25), m).unwrap();
        assert!((b.location - a.location - 3.25).abs() < 1e-8);
        assert!(rel(b.scale, a.scale) < 1e-6);
    }
    let c = gumbel_params(&Shifted(g, -1.5), 50).unwrap();
    assert!((c.location - gumbel_params(&g, 50).unwrap().location + 1.5).abs() < 1e-8);
}

#[test]
fn gumbel_distance_shrinks_for_exponential() {
    let e = GammaParams::new(1.0, 1.0).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(80);
    let ks: Vec<f64> = [10u32, 1000]
        .iter()
        .map(|&m| {
            let gp = gumbel_params(&e, m).unwrap();
            gumbel_cdf_distance(&gp, 100_000, |r: &mut ChaCha20Rng| r.sample::<f64, _>(Exp1), &mut rng).unwrap()
        })
        .collect();
    assert!(ks[1] < ks[0] && ks[1] < 0.02, "{ks:?}");
    // slower gamma tail: each decade of M is resolvable
    let g = GammaParams::new(3.0, 2.0).unwrap();
    let d = Gamma::new(3.0, 2.0).unwrap();
    let mut prev = f64::INFINITY;
    for m in [10u32, 100, 1000] {
        let gp = gumbel_params(&g, m).unwrap();
        let ks = gumbel_cdf_distance(&gp, 50_000, |r: &mut ChaCha20Rng| r.sample(d), &mut rng).unwrap();
        assert!(ks < prev, "{m} {ks}");
        prev = ks;
    }
}

fn fig8_law(pm_db: f64) -> (SystemConfig, CapacityFits, MarginalCapacityLaw) {
    let pool = SubcarrierPool::new(100, vec![40]).unwrap();
    let cfg = SystemConfig::new(pool, 10, db_to_linear(pm_db), vec![10.0], 1.0, 1.0).unwrap();
    let fl = fit_link(&cfg.link(0), &fejer_rule(DEFAULT_RULE_ORDER).unwrap()).unwrap();
    let fits = CapacityFits { interference: vec![fl.interference], nointerference: fl.nointerference };
    let law = marginal_capacity_law(&cfg, &fits, &SeriesOptions::default(), &Marginalization::default()).unwrap();
    (cfg, fits, law)
}

fn law_sampler(cfg: &SystemConfig, fits: &CapacityFits) -> impl FnMut(&mut ChaCha20Rng) -> f64 {
    let pool = cfg.pool().clone();
    let fs = cfg.su_subcarriers();
    let gi = Gamma::new(fits.interference[0].shape(), fits.interference[0].scale()).unwrap();
    let gn = Gamma::new(fits.nointerference.shape(), fits.nointerference.scale()).unwrap();
    move |rng| {
        let k = mvhypergeom_sample(fs, &pool, rng).unwrap().per_pu[0];
        (0..fs).map(|j| if j < k { rng.sample(gi) } else { rng.sample(gn) }).sum()
    }
}

#[test]
fn capacity_law_maximum_against_monte_carlo() {
    let (cfg, fits, law) = fig8_law(10.0);
    let gp = gumbel_params(&law, 200).unwrap();
    assert!((law.cdf(gp.location) - (1.0 - 1.0 / 200.0)).abs() < 1e-8);
    let asym = asymptotic_max_capacity(&gp);
    let mut rng = ChaCha20Rng::seed_from_u64(81);
    let mut draw = law_sampler(&cfg, &fits);
    let reps = 5000;
    let mean: f64 = (0..reps).map(|_| (0..200).map(|_| draw(&mut rng)).fold(f64::NEG_INFINITY, f64::max)).sum::<f64>()
        / reps as f64;
    assert!(rel(mean, asym) < 0.03, "{mean} {asym}");
    let ks = gumbel_cdf_distance(&gumbel_params(&law, 500).unwrap(), 4000, &mut draw, &mut rng).unwrap();
    assert!(ks < 0.05, "{ks}");
}

#[test]
fn asymptote_grows_with_users() {
    let (_, _, law) = fig8_law(10.0);
    let mut prev = f64::NEG_INFINITY;
    for m in [2u32, 5, 10, 40, 200, 1000] {
        let a = asymptotic_max_capacity(&gumbel_params(&law, m).unwrap());
        assert!(a > prev);
        prev = a;
    }
}

#[test]
fn termwise_inverse_diagnostic() {
    let (cfg, fits, law) = fig8_law(10.0);
    let fi = fits.interference[0];
    let fni = fits.nointerference;
    let r = termwise_inverse_location(&fi, &fni, 10, 40, cfg.total(), 200, 25);
    let beta = fi.scale().min(fni.scale());
    if (1.0 - 1.0 / 200.0) / beta < 1.0 {
        let v = r.unwrap();
        let b = gumbel_params(&law, 200).unwrap().location;
        assert!(v.is_finite() && v > 0.0 && (v - b).abs() > 1e-6);
    } else {
        assert!(r.is_err());
    }
    let g = GammaParams::new(1.0, 0.5).unwrap();
    assert!(termwise_inverse_location(&g, &g, 10, 40, 100, 200, 25).is_err());
    let wide = GammaParams::new(1.0, 2.0).unwrap();
    assert!(termwise_inverse_location(&wide, &wide, 10, 40, 100, 200, 25).unwrap() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn location_round_trip(comps in proptest::collection::vec((0.2f64..5.0, 0.2f64..3.0), 1..=4), m in 2u32..5000) {
        let s = MoschopoulosSeries::with_tolerance(&comps, &SeriesOptions { tolerance: 1e-12, ..Default::default() }).unwrap();
        let gp = gumbel_params(&s, m).unwrap();
        prop_assert!((s.sf(gp.location) - 1.0 / m as f64).abs() < 1e-10 / m as f64 + 1e-12);
        prop_assert!(gp.scale > 0.0);
        if m > 2 {
            let gq = gumbel_params(&s, m - 1).unwrap();
            prop_assert!(asymptotic_max_capacity(&gp) > asymptotic_max_capacity(&gq));
        }
    }
}
