use ofdmcr_core::collision::{CollisionVector, SubcarrierPool};
use ofdmcr_core::fading::{cdf_sinr_nointerference, LinkParams};
use ofdmcr_core::mcsim::*;
use ofdmcr_core::system::SystemConfig;
use proptest::prelude::*;
use rand::Rng;

fn cfg(total: u32, occ: &[u32], fs: u32, pm: f64, pn: &[f64], psi: f64, eta: f64) -> SystemConfig {
    SystemConfig::new(SubcarrierPool::new(total, occ.to_vec()).unwrap(), fs, pm, pn.to_vec(), psi, eta).unwrap()
}

#[test]
fn unit_exponential_moments_and_law() {
    let mut rng = SeedSpec::new(2718, 0).rng();
    let xs: Vec<f64> = (0..1_000_000).map(|_| unit_exponential(&mut rng)).collect();
    let st: RunningStats = xs.iter().copied().collect();
    assert!((st.mean() - 1.0).abs() < 0.004, "{}", st.mean());
    assert!((st.variance() - 1.0).abs() < 0.01, "{}", st.variance());
    assert!(xs.iter().all(|&x| x >= 0.0 && x.is_finite()));
    let ks = EmpiricalDistribution::new(xs).unwrap().ks_statistic(|x| 1.0 - (-x).exp());
    assert!(ks < 0.002, "{ks}");
}

#[test]
fn realized_capacity_hand_value() {
    let c = cfg(10, &[3], 2, 10.0, &[2.0], 1.0, 1.0);
    let d = ChannelDraw { h_m: vec![2.0, 0.5], h_mp: vec![0.5, 4.0], g_ns: vec![1.5, 9.0] };
    // shared: power min(10, 1/0.5) = 2, SINR 4 / (2 * 1.5 + 1) = 1
    // free: power 1/4, SINR 0.125
    let v = realize_capacity(&c, &CollisionVector::new(vec![1], 1), &d).unwrap();
    assert!((v - 2.25f64.ln()).abs() < 1e-15);
    assert!(realize_capacity(&c, &CollisionVector::new(vec![1], 2), &d).is_err());
    assert!(realize_capacity(&c, &CollisionVector::new(vec![1, 0], 1), &d).is_err());
}

#[test]
fn huge_noise_gives_zero_capacity() {
    let c = cfg(10, &[3], 4, 10.0, &[2.0], 1.0, 1e300);
    let mut rng = SeedSpec::new(3, 0).rng();
    for _ in 0..100 {
        assert!(sample_capacity(&c, &mut rng).unwrap() < 1e-290);
    }
}

#[test]
fn single_free_subcarrier_matches_sinr_law() {
    let c = cfg(20, &[0], 1, 10.0, &[1.0], 2.0, 0.5);
    let lp = LinkParams::new(10.0, 1.0, 2.0, 0.5).unwrap();
    let mut rng = SeedSpec::new(4, 0).rng();
    let xs: Vec<f64> = (0..200_000).map(|_| sample_capacity(&c, &mut rng).unwrap()).collect();
    let ks = EmpiricalDistribution::new(xs).unwrap().ks_statistic(|y| cdf_sinr_nointerference(y.exp_m1(), &lp));
    assert!(ks < 0.02, "{ks}");
}

#[test]
fn free_capacity_sum_matches_convolution_of_draws() {
    // two free subcarriers against the sum of two independent single draws
    let two = cfg(20, &[0], 2, 10.0, &[1.0], 2.0, 0.5);
    let one = cfg(20, &[0], 1, 10.0, &[1.0], 2.0, 0.5);
    let mut r1 = SeedSpec::new(5, 0).rng();
    let mut r2 = SeedSpec::new(5, 1).rng();
    let a: Vec<f64> = (0..100_000).map(|_| sample_capacity(&two, &mut r1).unwrap()).collect();
    let b: Vec<f64> = (0..100_000)
        .map(|_| sample_capacity(&one, &mut r2).unwrap() + sample_capacity(&one, &mut r2).unwrap())
        .collect();
    let d = EmpiricalDistribution::new(a).unwrap().ks_two_sample(&EmpiricalDistribution::new(b).unwrap());
    // two-sample critical value at 0.001 is about 0.0087 for these sizes
    assert!(d < 0.0087, "{d}");
}

#[test]
fn empirical_tools_small_cases() {
    let e = EmpiricalDistribution::new(vec![3.0, 1.0, 2.0]).unwrap();
    assert_eq!(e.sorted(), &[1.0, 2.0, 3.0]);
    assert!((e.ecdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(e.ecdf(0.5), 0.0);
    assert_eq!(e.ecdf(3.0), 1.0);
    assert_eq!(e.ks_two_sample(&e), 0.0);
    assert!(EmpiricalDistribution::new(vec![1.0]).is_err());
    assert!(EmpiricalDistribution::new(vec![2.0, 2.0, 2.0]).is_err());
    assert!(EmpiricalDistribution::new(vec![1.0, f64::NAN]).is_err());
    // uniform cdf on {1,2,3}: largest gap is 1/3 at the left edge
    let ks = e.ks_statistic(|x| ((x - 1.0) / 2.0).clamp(0.0, 1.0));
    assert!((ks - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn histogram_integrates_to_one() {
    let mut rng = SeedSpec::new(6, 0).rng();
    let e = EmpiricalDistribution::new((0..50_000).map(|_| unit_exponential(&mut rng)).collect()).unwrap();
    let h = e.histogram();
    let mass: f64 = h.edges.windows(2).zip(&h.density).map(|(w, d)| (w[1] - w[0]) * d).sum();
    assert!((mass - 1.0).abs() < 1e-12);
    let h = e.histogram_with_edges(vec![0.0, 1.0, 2.0]);
    // exp(-1) - exp(-2) of the mass lies in [1, 2]
    assert!((h.density[1] - (0.367_879_441 - 0.135_335_283)).abs() < 0.01);
}

#[test]
fn chi_square_detects_bias() {
    let mut rng = SeedSpec::new(7, 0).rng();
    let mut fair = [0u64; 6];
    let mut loaded = [0u64; 6];
    for _ in 0..60_000 {
        fair[rng.random_range(0..6)] += 1;
        let u: f64 = rng.random();
        loaded[if u < 0.2 { 0 } else { 1 + rng.random_range(0..5) }] += 1;
    }
    let p = [1.0 / 6.0; 6];
    let r = chi_square_gof(&fair, &p, 5.0).unwrap();
    assert_eq!((r.dof, r.samples), (5, 60_000));
    assert!(r.p_value > 0.001, "{r:?}");
    assert!(chi_square_gof(&loaded, &p, 5.0).unwrap().p_value < 1e-10);
    assert!(chi_square_gof(&fair, &p[..5], 5.0).is_err());
}

#[test]
fn chi_square_pools_sparse_cells() {
    let r = chi_square_gof(&[50, 45, 3, 1, 1], &[0.5, 0.45, 0.03, 0.01, 0.01], 5.0).unwrap();
    assert_eq!(r.cells, 3);
    assert!(r.statistic.abs() < 1e-12);
    assert_eq!(r.p_value, 1.0);
}

#[test]
fn dkw_band_width() {
    // ln(2/0.05) / (2 * 1000)
    assert!((dkw_epsilon(1000, 0.05) - (3.688_879_454_113_936f64 / 2000.0).sqrt()).abs() < 1e-15);
    let e = EmpiricalDistribution::new(vec![0.1, 0.5, 0.9]).unwrap();
    assert_eq!(e.dkw_excess(|x: f64| x.clamp(0.0, 1.0), 0.5), 0.0);
}

#[test]
fn gamma_sum_sampler_moments() {
    let mut rng = SeedSpec::new(8, 0).rng();
    let comps = [(2.0, 0.5), (0.0, 3.0), (0.7, 2.0)];
    let st: RunningStats = (0..400_000).map(|_| sample_gamma_sum(&comps, &mut rng).unwrap()).collect();
    let (m, v) = (1.0 + 1.4, 0.5 + 2.8);
    assert!((st.mean() - m).abs() < 3.0 * st.std_error());
    assert!((st.variance() - v).abs() < 0.05);
    assert!(sample_gamma_sum(&[(-1.0, 1.0)], &mut rng).is_err());
}

#[test]
fn streams_are_deterministic() {
    let s = SeedSpec::new(99, 17);
    let a: Vec<u64> = {
        let mut r = s.rng();
        (0..8).map(|_| r.random()).collect()
    };
    let b: Vec<u64> = {
        let mut r = s.rng();
        (0..8).map(|_| r.random()).collect()
    };
    assert_eq!(a, b);
    let c: Vec<u64> = {
        let mut r = s.with_stream(18).rng();
        (0..8).map(|_| r.random()).collect()
    };
    assert_ne!(a, c);
    assert_eq!(draw_channels(5, &mut s.rng()), draw_channels(5, &mut s.rng()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn running_stats_merge_is_exact(
        a in prop::collection::vec(-1e3f64..1e3, 0..40),
        b in prop::collection::vec(-1e3f64..1e3, 0..40),
    ) {
        let sa: RunningStats = a.iter().copied().collect();
        let sb: RunningStats = b.iter().copied().collect();
        let all: RunningStats = a.iter().chain(&b).copied().collect();
        let m = sa.merge(&sb);
        prop_assert_eq!(m.count(), all.count());
        prop_assert!((m.mean() - all.mean()).abs() < 1e-9);
        prop_assert!((m.variance() - all.variance()).abs() < 1e-6 * (1.0 + all.variance()));
    }

    #[test]
    fn capacity_is_nonnegative_and_monotone_in_gain(
        pm in 0.1f64..1e3, psi in 0.01f64..1e2, pn in 0.0f64..1e2, eta in 0.01f64..10.0,
        h in 0.0f64..10.0, hmp in 0.001f64..10.0, g in 0.0f64..10.0,
    ) {
        let c = cfg(4, &[2], 1, pm, &[pn], psi, eta);
        let at = |h: f64| {
            let d = ChannelDraw { h_m: vec![h], h_mp: vec![hmp], g_ns: vec![g] };
            realize_capacity(&c, &CollisionVector::new(vec![1], 0), &d).unwrap()
        };
        prop_assert!(at(h) >= 0.0);
        prop_assert!(at(h + 1.0) > at(h));
        let free = ChannelDraw { h_m: vec![h], h_mp: vec![hmp], g_ns: vec![g] };
        let f = realize_capacity(&c, &CollisionVector::new(vec![0], 1), &free).unwrap();
        prop_assert!(f >= at(h));
    }
}
