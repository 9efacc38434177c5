//! Named experiments. Each produces a table plus the tolerance checks that
//! its analytic and Monte Carlo columns must satisfy.

use std::io::Write;

use ofdmcr_core::capmoments::{db_to_linear, GammaParams};
use ofdmcr_core::collision::{mvhypergeom_sample, sequential_mean, Marginalization};
use ofdmcr_core::fading::{capacity_pdf_transform, LinkParams, SinrInterference, SinrNoInterference};
use ofdmcr_core::law::ContinuousLaw;
use ofdmcr_core::mcsim::{
    sample_capacity, sample_gamma_sum, sample_sinr_interference, sample_sinr_nointerference, EmpiricalDistribution,
    RunningStats,
};
use ofdmcr_core::meancap::{avg_capacity_multi_pu, capacity_bounds_multi_pu};
use ofdmcr_core::moschopoulos::{marginal_capacity_law, CapacityFits, MoschopoulosSeries, SeriesOptions};
use ofdmcr_core::scheduler::{run_arbitrary, run_colliding_baseline, run_opportunistic, sum_capacity_approximation};
use ofdmcr_core::system::SystemConfig;

use crate::config::{Experiment, ExperimentSpec};
use crate::error::CliError;
use crate::harness::{replicate, FitCache};
use crate::output::Table;

/// Components of the two sums drawn in fig3.
pub const FIG3_FOUR: [(f64, f64); 4] = [(1.5, 1.0), (2.0, 1.3), (0.7, 0.8), (3.2, 1.1)];
pub const FIG3_TWO: [(f64, f64); 2] = [(2.0, 1.0), (1.0, 2.0)];

/// Standard errors allowed between a Monte Carlo mean and its analytic value.
pub const SIGMA_BAND: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub table: Table,
    pub checks: Vec<Check>,
}

impl RunOutcome {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

pub fn series_options(spec: &ExperimentSpec) -> SeriesOptions {
    SeriesOptions { initial_terms: spec.series_terms, ..SeriesOptions::default() }
}

/// Gamma fits of every link of `cfg`.
pub fn capacity_fits(cfg: &SystemConfig, order: usize, cache: &FitCache) -> Result<CapacityFits, CliError> {
    let interference: Result<Vec<GammaParams>, CliError> =
        (0..cfg.num_pus()).map(|n| cache.fits(&cfg.link(n), order).map(|f| f.interference)).collect();
    Ok(CapacityFits {
        interference: interference?,
        nointerference: cache.fits(&cfg.free_link(), order)?.nointerference,
    })
}

fn stats<I: IntoIterator<Item = f64>>(xs: I) -> RunningStats {
    xs.into_iter().collect()
}

fn within_band(mc: &RunningStats, analytic: f64) -> bool {
    (mc.mean() - analytic).abs() <= SIGMA_BAND * mc.std_error() + 1e-12 * analytic.abs()
}

/// Run `spec` and collect its table and checks. Nothing is written.
pub fn run_experiment(spec: &ExperimentSpec, cache: &FitCache) -> Result<RunOutcome, CliError> {
    match spec.experiment {
        Experiment::Fig2a | Experiment::Fig2b => fig2(spec, cache),
        Experiment::Fig3 => fig3(spec),
        Experiment::Fig4 | Experiment::Fig5 | Experiment::Fig6 | Experiment::Fig7 => mean_sweep(spec, cache),
        Experiment::Fig8 => fig8(spec, cache),
        Experiment::Outage => outage(spec, cache),
        Experiment::Custom => custom(spec, cache),
    }
}

fn fig2(spec: &ExperimentSpec, cache: &FitCache) -> Result<RunOutcome, CliError> {
    let lp =
        LinkParams::new(db_to_linear(spec.pm_db), db_to_linear(spec.pn_db[0]), db_to_linear(spec.psi_db), spec.eta)?;
    let fits = cache.fits(&lp, spec.rule_order)?;
    let exact_i = capacity_pdf_transform(SinrInterference(lp));
    let exact_ni = capacity_pdf_transform(SinrNoInterference(lp));
    let mut checks = Checks::default();
    let mc = spec.replications > 0;
    let mut cols = vec!["capacity", "exact_pdf_I", "gamma_pdf_I", "exact_pdf_NI", "gamma_pdf_NI"];
    if mc {
        cols.extend(["mc_density_I", "mc_density_NI"]);
    }
    let mut t = Table::new(&cols);
    for (name, g) in [("I", fits.interference), ("NI", fits.nointerference)] {
        t.note(format!("gamma fit C^{name}: shape {} scale {}", g.shape(), g.scale()));
    }
    let samples = if mc {
        let pairs = replicate(spec.seed, 0, spec.replications, |rng| {
            let a = sample_sinr_interference(&lp, rng).ln_1p();
            let b = sample_sinr_nointerference(&lp, rng).ln_1p();
            Ok((a, b))
        })?;
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let ea = EmpiricalDistribution::new(a)?;
        let eb = EmpiricalDistribution::new(b)?;
        for (name, e, g) in [("I", &ea, fits.interference), ("NI", &eb, fits.nointerference)] {
            let ks = e.ks_statistic(|x| g.cdf(x));
            t.note(format!("KS(C^{name} Monte Carlo, Gamma fit) = {ks}"));
            checks.add(format!("KS C^{name} < 0.05"), ks < 0.05, format!("KS = {ks}"));
        }
        Some((ea.histogram_with_edges(spec.grid.clone()), eb.histogram_with_edges(spec.grid.clone())))
    } else {
        None
    };
    for i in 0..spec.grid.len().saturating_sub(1) {
        let x = 0.5 * (spec.grid[i] + spec.grid[i + 1]);
        let mut row = vec![x, exact_i.pdf(x), fits.interference.pdf(x), exact_ni.pdf(x), fits.nointerference.pdf(x)];
        if let Some((ha, hb)) = &samples {
            row.extend([ha.density[i], hb.density[i]]);
        }
        t.push(row);
    }
    Ok(RunOutcome { table: t, checks: checks.0 })
}

fn fig3(spec: &ExperimentSpec) -> Result<RunOutcome, CliError> {
    let sets: [&[(f64, f64)]; 2] = [&FIG3_FOUR, &FIG3_TWO];
    let mut checks = Checks::default();
    let mc = spec.replications > 0;
    let mut series = Vec::new();
    let mut emp = Vec::new();
    let mut t = Table::new(&[]);
    let mut cols = vec!["y".to_string()];
    for (slot, comps) in sets.iter().enumerate() {
        let s = comps.len();
        let ser = MoschopoulosSeries::build(comps, spec.series_terms)?;
        t.note(format!(
            "S = {s}: components (shape, scale) {comps:?}, h = {}, truncation bound {:e}",
            spec.series_terms,
            ser.truncation_bound()
        ));
        cols.extend([format!("pdf_S{s}"), format!("cdf_S{s}")]);
        if mc {
            cols.push(format!("mc_cdf_S{s}"));
            let xs = replicate(spec.seed, slot as u64, spec.replications, |rng| Ok(sample_gamma_sum(comps, rng)?))?;
            let e = EmpiricalDistribution::new(xs)?;
            let ks = e.ks_statistic(|y| ser.cdf(y));
            t.note(format!("KS(S = {s} Monte Carlo, series) = {ks}"));
            checks.add(format!("KS S={s} < 0.01"), ks < 0.01, format!("KS = {ks}"));
            emp.push(Some(e));
        } else {
            emp.push(None);
        }
        series.push(ser);
    }
    t.columns = cols;
    for &y in &spec.grid {
        let mut row = vec![y];
        for (ser, e) in series.iter().zip(&emp) {
            row.extend([ser.pdf(y).max(0.0), ser.cdf(y)]);
            if let Some(e) = e {
                row.push(e.ecdf(y));
            }
        }
        t.push(row);
    }
    Ok(RunOutcome { table: t, checks: checks.0 })
}

/// System at one point of a mean-capacity sweep.
pub fn sweep_system(spec: &ExperimentSpec, curve: f64, x: f64) -> Result<SystemConfig, CliError> {
    let mut s = spec.clone();
    let (pm, psi) = match spec.experiment {
        Experiment::Fig4 => (x, curve),
        Experiment::Fig5 => (curve, x),
        Experiment::Fig6 => {
            let n = curve as usize;
            s.pu_subcarriers = vec![spec.pu_subcarriers[0]; n];
            s.pn_db = vec![spec.pn_db[0]; n];
            (x, spec.psi_db)
        }
        Experiment::Fig7 => {
            s.total = x as u32;
            s.pu_subcarriers = vec![curve as u32];
            (spec.pm_db, spec.psi_db)
        }
        _ => (spec.pm_db, spec.psi_db),
    };
    s.system_at(pm, psi)
}

fn mean_sweep(spec: &ExperimentSpec, cache: &FitCache) -> Result<RunOutcome, CliError> {
    let (xname, cname) = spec.experiment.axes();
    let cname = cname.expect("sweep experiments have curves");
    let mc = spec.replications > 0;
    let mut cols =
        vec![cname, xname, "analytic", "series_mean", "naive_lower", "naive_upper", "tight_lower", "tight_upper"];
    if spec.experiment == Experiment::Fig7 {
        cols.extend(["limit", "gap"]);
    }
    if mc {
        cols.extend(["mc_mean", "mc_se"]);
    }
    let mut t = Table::new(&cols);
    let mut checks = Checks::default();
    let (mut band_ok, mut bracket_ok, mut series_ok) = (true, true, true);
    let mut worst_z: f64 = 0.0;
    let mut worst_series: f64 = 0.0;
    let opts = series_options(spec);
    let budget = Marginalization::default();
    let mut slot = 0u64;
    for &curve in &spec.curves {
        let mut prev: Option<f64> = None;
        let mut monotone = true;
        for &x in &spec.grid {
            let cfg = sweep_system(spec, curve, x)?;
            let analytic = avg_capacity_multi_pu(&cfg)?;
            let b = capacity_bounds_multi_pu(&cfg)?;
            let fits = capacity_fits(&cfg, spec.rule_order, cache)?;
            let series_mean = marginal_capacity_law(&cfg, &fits, &opts, &budget)?.mean();
            let rel = ((series_mean - analytic) / analytic).abs();
            worst_series = worst_series.max(rel);
            series_ok &= rel < 1e-6;
            bracket_ok &= b.tight_lower <= analytic * (1.0 + 1e-12) && analytic <= b.tight_upper * (1.0 + 1e-12);
            let mut row =
                vec![curve, x, analytic, series_mean, b.naive_lower, b.naive_upper, b.tight_lower, b.tight_upper];
            if spec.experiment == Experiment::Fig7 {
                let limit = cfg.su_subcarriers() as f64 * fits_mean_ni(&cfg)?;
                row.extend([limit, analytic - limit]);
            }
            if mc {
                let st = stats(replicate(spec.seed, slot, spec.replications, |rng| Ok(sample_capacity(&cfg, rng)?))?);
                band_ok &= within_band(&st, analytic);
                worst_z = worst_z.max((st.mean() - analytic).abs() / st.std_error());
                let slack = SIGMA_BAND * st.std_error();
                bracket_ok &= b.tight_lower - slack <= st.mean() && st.mean() <= b.tight_upper + slack;
                row.extend([st.mean(), st.std_error()]);
            }
            if let Some(p) = prev {
                if spec.experiment != Experiment::Fig7 && analytic < p * (1.0 - 1e-12) {
                    monotone = false;
                }
            }
            prev = Some(analytic);
            t.push(row);
            slot += 1;
        }
        if spec.experiment != Experiment::Fig7 {
            checks.add(format!("analytic nondecreasing in {xname} ({cname} = {curve})"), monotone, "");
        }
    }
    checks.add(
        "series mixture mean equals closed form (1e-6)",
        series_ok,
        format!("worst relative gap {worst_series:e}"),
    );
    checks.add("tight bounds bracket the analytic mean and the Monte Carlo mean up to its band", bracket_ok, "");
    if mc {
        checks.add(
            format!("Monte Carlo within {SIGMA_BAND} standard errors"),
            band_ok,
            format!("largest |z| = {worst_z}"),
        );
    }
    if spec.experiment == Experiment::Fig7 {
        for &curve in &spec.curves {
            let gaps: Vec<f64> =
                t.rows.iter().filter(|r| r[0] == curve).map(|r| r[r.len() - if mc { 3 } else { 1 }]).collect();
            let shrinking = gaps.windows(2).all(|w| w[1].abs() <= w[0].abs());
            checks.add(format!("gap to the limit shrinks with F (Fp = {curve})"), shrinking, "");
        }
    }
    Ok(RunOutcome { table: t, checks: checks.0 })
}

fn fits_mean_ni(cfg: &SystemConfig) -> Result<f64, CliError> {
    Ok(ofdmcr_core::capmoments::mean_capacity_nointerference(&cfg.free_link())?)
}

/// Expected sum capacity of `selections` users allocated one after the
/// other in index order.
pub fn arbitrary_sum_mean(cfg: &SystemConfig, selections: u32) -> Result<f64, CliError> {
    use ofdmcr_core::capmoments::{mean_capacity_interference, mean_capacity_nointerference};
    let fs = cfg.su_subcarriers();
    let rows = sequential_mean(&vec![fs; selections as usize], cfg.pool())?;
    let ci: Result<Vec<f64>, _> = (0..cfg.num_pus()).map(|n| mean_capacity_interference(&cfg.link(n))).collect();
    let ci = ci?;
    let cni = mean_capacity_nointerference(&cfg.free_link())?;
    Ok(rows
        .iter()
        .map(|r| {
            let shared: f64 = r.iter().sum();
            r.iter().zip(&ci).map(|(k, c)| k * c).sum::<f64>() + (fs as f64 - shared) * cni
        })
        .sum())
}

fn fig8(spec: &ExperimentSpec, cache: &FitCache) -> Result<RunOutcome, CliError> {
    let mc = spec.replications > 0;
    let m_max = *spec.users.iter().max().expect("validated");
    let mut cols: Vec<String> = vec!["Pm_dB".into(), "arbitrary_analytic".into()];
    for m in &spec.users {
        cols.push(format!("approx_M{m}"));
    }
    if mc {
        for m in &spec.users {
            cols.extend([format!("opportunistic_M{m}"), format!("opportunistic_M{m}_se")]);
        }
        cols.extend(["arbitrary".into(), "arbitrary_se".into(), "colliding".into(), "colliding_se".into()]);
    }
    let mut t = Table::new(&[]);
    t.columns = cols;
    t.note(format!(
        "arbitrary and colliding baselines take users 0..{} in index order; the colliding baseline samples every set from all F subcarriers",
        spec.selections
    ));
    t.note(format!("baselines run with M = {m_max}; their output does not depend on M"));
    t.note("approx_M* is M_hat times the Gumbel asymptote of the best first-step capacity");
    let mut checks = Checks::default();
    let mut band_ok = true;
    let (mut ordered, mut unordered) = (true, Vec::new());
    let mut worst_approx: f64 = 0.0;
    let label = |j: usize| match j.cmp(&spec.users.len()) {
        std::cmp::Ordering::Less => format!("opportunistic M = {}", spec.users[j]),
        std::cmp::Ordering::Equal => "arbitrary".to_string(),
        std::cmp::Ordering::Greater => "colliding".to_string(),
    };
    let opts = series_options(spec);
    for (slot, &pm) in spec.grid.iter().enumerate() {
        let cfg = spec.system_at(pm, spec.psi_db)?;
        let fits = capacity_fits(&cfg, spec.rule_order, cache)?;
        let arb_mean = arbitrary_sum_mean(&cfg, spec.selections)?;
        let mut row = vec![pm, arb_mean];
        for &m in &spec.users {
            row.push(sum_capacity_approximation(&cfg, &fits, m, spec.selections, &opts)?.value);
        }
        if mc {
            let sel = spec.selections as usize;
            let users = spec.users.clone();
            let reps = replicate(spec.seed, slot as u64, spec.replications, |rng| {
                let mut v = Vec::with_capacity(users.len() + 2);
                for &m in &users {
                    v.push(run_opportunistic(&cfg, m as usize, sel, &mut rng.clone())?.sum_capacity);
                }
                v.push(run_arbitrary(&cfg, m_max as usize, sel, &mut rng.clone())?.sum_capacity);
                v.push(run_colliding_baseline(&cfg, m_max as usize, sel, &mut rng.clone())?.sum_capacity);
                Ok(v)
            })?;
            let mut means = Vec::new();
            for j in 0..spec.users.len() + 2 {
                let st = stats(reps.iter().map(|v| v[j]));
                if j == spec.users.len() {
                    band_ok &= within_band(&st, arb_mean);
                }
                means.push(st.mean());
                row.extend([st.mean(), st.std_error()]);
            }
            for (i, &m) in spec.users.iter().enumerate() {
                if m >= 4 * spec.selections {
                    let r = (row[2 + i] - means[i]).abs() / means[i];
                    worst_approx = worst_approx.max(r);
                }
            }
            // columns by decreasing expected capacity: largest M first
            let mut order: Vec<usize> = (0..spec.users.len()).collect();
            order.sort_by_key(|&i| std::cmp::Reverse(spec.users[i]));
            order.dedup_by_key(|i| spec.users[*i]);
            order.extend([spec.users.len(), spec.users.len() + 1]);
            for w in order.windows(2) {
                let d = stats(reps.iter().map(|v| v[w[0]] - v[w[1]]));
                if d.mean() - 1.645 * d.std_error() <= 0.0 {
                    ordered = false;
                    unordered.push(format!("{pm} dB: {} vs {}", label(w[0]), label(w[1])));
                }
            }
        }
        t.push(row);
    }
    if mc {
        checks.add(format!("arbitrary baseline within {SIGMA_BAND} standard errors of its mean"), band_ok, "");
        checks.add(
            "paired ordering opportunistic (larger M first) > arbitrary > colliding at 95%",
            ordered,
            unordered.join("; "),
        );
        if spec.users.iter().any(|&m| m >= 4 * spec.selections) {
            checks.add(
                "approximation within 10% of simulation where M >= 4 M_hat",
                worst_approx < 0.10,
                format!("largest relative gap {worst_approx}"),
            );
        }
    }
    Ok(RunOutcome { table: t, checks: checks.0 })
}

fn outage(spec: &ExperimentSpec, cache: &FitCache) -> Result<RunOutcome, CliError> {
    let cfg = spec.system()?;
    let fits = capacity_fits(&cfg, spec.rule_order, cache)?;
    let law = marginal_capacity_law(&cfg, &fits, &series_options(spec), &Marginalization::default())?;
    let grid = if spec.grid.is_empty() {
        let top = 2.0 * law.mean();
        (0..=24).map(|i| top * i as f64 / 24.0).collect()
    } else {
        spec.grid.clone()
    };
    let mc = spec.replications > 0;
    let mut cols = vec!["threshold", "analytic"];
    if mc {
        cols.extend(["mc_model", "mc_model_se", "mc_chain", "mc_chain_se"]);
    }
    let mut t = Table::new(&cols);
    t.note("mc_model samples the fitted Gamma model; mc_chain samples the physical channel chain");
    t.note(format!("series truncation bound {:e}", law.truncation_bound()));
    let mut checks = Checks::default();
    let samples = if mc {
        let fs = cfg.su_subcarriers();
        let model = replicate(spec.seed, 0, spec.replications, |rng| {
            let kv = mvhypergeom_sample(fs, cfg.pool(), rng)?;
            let mut comps: Vec<(f64, f64)> =
                fits.interference.iter().zip(&kv.per_pu).map(|(g, &k)| (g.shape() * k as f64, g.scale())).collect();
            comps.push((fits.nointerference.shape() * kv.free as f64, fits.nointerference.scale()));
            Ok(sample_gamma_sum(&comps, rng)?)
        })?;
        let chain = replicate(spec.seed, 1, spec.replications, |rng| Ok(sample_capacity(&cfg, rng)?))?;
        Some((EmpiricalDistribution::new(model)?, EmpiricalDistribution::new(chain)?))
    } else {
        None
    };
    let mut band_ok = true;
    let mut chain_gap: f64 = 0.0;
    let n = spec.replications as f64;
    for &x in &grid {
        let p = law.cdf(x);
        let mut row = vec![x, p];
        if let Some((m, c)) = &samples {
            let (pm, pc) = (m.ecdf(x), c.ecdf(x));
            let (sm, sc) = ((pm * (1.0 - pm) / n).sqrt(), (pc * (1.0 - pc) / n).sqrt());
            // binomial spread under the analytic value, as the empirical one
            // vanishes in the far tail
            let null = (p * (1.0 - p) / n).sqrt();
            band_ok &= (pm - p).abs() <= SIGMA_BAND * null + law.truncation_bound() + 1e-12;
            chain_gap = chain_gap.max((pc - p).abs());
            row.extend([pm, sm, pc, sc]);
        }
        t.push(row);
    }
    if mc {
        checks.add(format!("model Monte Carlo within {SIGMA_BAND} standard errors"), band_ok, "");
        checks.add(
            "chain Monte Carlo within 0.05 of the Gamma-model CDF",
            chain_gap < 0.05,
            format!("largest gap {chain_gap}"),
        );
    }
    Ok(RunOutcome { table: t, checks: checks.0 })
}

fn custom(spec: &ExperimentSpec, cache: &FitCache) -> Result<RunOutcome, CliError> {
    let cfg = spec.system()?;
    let analytic = avg_capacity_multi_pu(&cfg)?;
    let b = capacity_bounds_multi_pu(&cfg)?;
    let fits = capacity_fits(&cfg, spec.rule_order, cache)?;
    let law = marginal_capacity_law(&cfg, &fits, &series_options(spec), &Marginalization::default())?;
    let mc = spec.replications > 0;
    let mut cols = vec!["point", "analytic", "series_mean", "naive_lower", "naive_upper", "tight_lower", "tight_upper"];
    if mc {
        cols.extend(["mc_mean", "mc_se"]);
    }
    let mut t = Table::new(&cols);
    for (n, g) in fits.interference.iter().enumerate() {
        t.note(format!("gamma fit C^I (PU {n}): shape {} scale {}", g.shape(), g.scale()));
    }
    t.note(format!("gamma fit C^NI: shape {} scale {}", fits.nointerference.shape(), fits.nointerference.scale()));
    let mut row = vec![0.0, analytic, law.mean(), b.naive_lower, b.naive_upper, b.tight_lower, b.tight_upper];
    let mut checks = Checks::default();
    if mc {
        let st = stats(replicate(spec.seed, 0, spec.replications, |rng| Ok(sample_capacity(&cfg, rng)?))?);
        checks.add(
            format!("Monte Carlo within {SIGMA_BAND} standard errors"),
            within_band(&st, analytic),
            format!("mean {} se {}", st.mean(), st.std_error()),
        );
        row.extend([st.mean(), st.std_error()]);
    }
    t.push(row);
    Ok(RunOutcome { table: t, checks: checks.0 })
}

/// Header lines recording the tool version and the resolved spec.
pub fn header(spec: &ExperimentSpec) -> Vec<String> {
    let mut h =
        vec![format!("ofdmcr {}", env!("CARGO_PKG_VERSION")), format!("experiment: {}", spec.experiment.describe())];
    h.extend(spec.to_lines().into_iter().map(|l| format!("config: {l}")));
    h
}

/// Run `spec`, write its CSV to `spec.out` (or `stdout`), report checks on
/// `log`, and fail with a tolerance error if any check failed. The table
/// is written either way.
pub fn run_and_write<W: Write>(spec: &ExperimentSpec, stdout: W, log: &mut dyn Write) -> Result<RunOutcome, CliError> {
    let cache = FitCache::new();
    let outcome = run_experiment(spec, &cache)?;
    let head = header(spec);
    match &spec.out {
        Some(p) => outcome.table.write_file(&head, p)?,
        None => outcome.table.write_to(&head, stdout)?,
    }
    for c in &outcome.checks {
        let tag = if c.passed { "ok" } else { "FAILED" };
        writeln!(log, "check {tag}: {} {}", c.name, c.detail)?;
    }
    let failed = outcome.failures();
    if !failed.is_empty() {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        return Err(CliError::Tolerance(names.join("; ")));
    }
    Ok(outcome)
}
