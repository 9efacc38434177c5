//! Flat `key = value` experiment configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use ofdmcr_core::capmoments::db_to_linear;
use ofdmcr_core::collision::SubcarrierPool;
use ofdmcr_core::system::SystemConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Outage,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Fig2a,
        Experiment::Fig2b,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::Fig6,
        Experiment::Fig7,
        Experiment::Fig8,
        Experiment::Outage,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2a => "fig2a",
            Experiment::Fig2b => "fig2b",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
            Experiment::Fig7 => "fig7",
            Experiment::Fig8 => "fig8",
            Experiment::Outage => "outage",
            Experiment::Custom => "custom",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Experiment::Fig2a | Experiment::Fig2b => {
                "per-subcarrier capacity densities: exact, moment-matched Gamma, Monte Carlo"
            }
            Experiment::Fig3 => "sum-of-Gamma series density and CDF against Monte Carlo",
            Experiment::Fig4 => "mean SU capacity versus SU power, one curve per interference temperature",
            Experiment::Fig5 => "mean SU capacity versus interference temperature, one curve per SU power",
            Experiment::Fig6 => "mean SU capacity and bounds versus SU power, one curve per PU count",
            Experiment::Fig7 => "mean SU capacity versus total subcarriers, one curve per PU subcarrier count",
            Experiment::Fig8 => "sum capacity of the scheduler and its baselines versus SU power",
            Experiment::Outage => "SU capacity CDF (outage probability) versus threshold",
            Experiment::Custom => "single operating point: mean capacity, bounds, fits",
        }
    }

    /// Name of the swept variable and of the curve variable.
    pub fn axes(self) -> (&'static str, Option<&'static str>) {
        match self {
            Experiment::Fig2a | Experiment::Fig2b => ("capacity", None),
            Experiment::Fig3 => ("y", None),
            Experiment::Fig4 => ("Pm_dB", Some("psi_dB")),
            Experiment::Fig5 => ("psi_dB", Some("Pm_dB")),
            Experiment::Fig6 => ("Pm_dB", Some("N")),
            Experiment::Fig7 => ("F", Some("Fp")),
            Experiment::Fig8 => ("Pm_dB", None),
            Experiment::Outage => ("threshold", None),
            Experiment::Custom => ("point", None),
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or(())
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved experiment. Powers are in dB here and converted once in
/// [`ExperimentSpec::system`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub total: u32,
    pub su_subcarriers: u32,
    pub pu_subcarriers: Vec<u32>,
    pub pm_db: f64,
    pub pn_db: Vec<f64>,
    pub psi_db: f64,
    pub eta: f64,
    pub users: Vec<u32>,
    pub selections: u32,
    pub replications: u64,
    pub seed: u64,
    pub series_terms: usize,
    pub rule_order: usize,
    pub out: Option<PathBuf>,
    pub grid: Vec<f64>,
    pub curves: Vec<f64>,
}

const KEYS: [&str; 17] = [
    "experiment",
    "F",
    "Fs",
    "Fp",
    "Pm_dB",
    "Pn_dB",
    "psi_dB",
    "eta",
    "M",
    "M_hat",
    "replications",
    "seed",
    "h",
    "Np",
    "out",
    "grid",
    "curves",
];

fn steps(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + step * i as f64).collect()
}

impl ExperimentSpec {
    /// Defaults of a named experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentSpec {
            experiment,
            total: 128,
            su_subcarriers: 20,
            pu_subcarriers: vec![30],
            pm_db: 10.0,
            pn_db: vec![10.0],
            psi_db: 0.0,
            eta: 1.0,
            users: vec![10, 40],
            selections: 5,
            replications: 10_000,
            seed: 20_240_601,
            series_terms: 25,
            rule_order: 50,
            out: None,
            grid: Vec::new(),
            curves: Vec::new(),
        };
        match experiment {
            Experiment::Fig2a => ExperimentSpec {
                pm_db: 20.0,
                pn_db: vec![10.0],
                psi_db: 0.0,
                eta: 1.0,
                replications: 100_000,
                grid: steps(0.0, 4.0, 0.05),
                ..base
            },
            Experiment::Fig2b => ExperimentSpec {
                pm_db: 40.0,
                pn_db: vec![0.0],
                psi_db: 20.0,
                eta: 0.01,
                replications: 100_000,
                grid: steps(0.0, 14.0, 0.1),
                ..base
            },
            Experiment::Fig3 => ExperimentSpec { replications: 1_000_000, grid: steps(0.0, 20.0, 0.25), ..base },
            Experiment::Fig4 => ExperimentSpec { grid: steps(-10.0, 40.0, 5.0), curves: vec![-5.0, 0.0, 5.0], ..base },
            Experiment::Fig5 => ExperimentSpec { grid: steps(-20.0, 40.0, 2.5), curves: vec![0.0, 10.0, 20.0], ..base },
            Experiment::Fig6 => ExperimentSpec {
                pu_subcarriers: vec![10],
                pn_db: vec![5.0],
                psi_db: -5.0,
                grid: steps(-10.0, 40.0, 5.0),
                curves: vec![2.0, 6.0, 12.0],
                ..base
            },
            Experiment::Fig7 => ExperimentSpec {
                pn_db: vec![5.0],
                pm_db: 10.0,
                psi_db: -5.0,
                grid: vec![64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0, 16384.0],
                curves: vec![10.0, 30.0, 50.0],
                ..base
            },
            Experiment::Fig8 => ExperimentSpec {
                total: 100,
                su_subcarriers: 10,
                pu_subcarriers: vec![40],
                pn_db: vec![10.0],
                psi_db: 0.0,
                users: vec![10, 40],
                selections: 5,
                replications: 2_000,
                grid: steps(-10.0, 30.0, 5.0),
                ..base
            },
            Experiment::Outage => ExperimentSpec { replications: 100_000, psi_db: 0.0, ..base },
            Experiment::Custom => base,
        }
    }

    pub fn pu_count(&self) -> usize {
        self.pu_subcarriers.len()
    }

    /// Linear-power system at the given SU power and interference
    /// temperature (dB).
    pub fn system_at(&self, pm_db: f64, psi_db: f64) -> Result<SystemConfig, CliError> {
        let pool = SubcarrierPool::new(self.total, self.pu_subcarriers.clone())
            .map_err(|e| CliError::Config(format!("subcarrier pool: {e}")))?;
        let pn = self.pn_db.iter().map(|&p| db_to_linear(p)).collect();
        SystemConfig::new(pool, self.su_subcarriers, db_to_linear(pm_db), pn, db_to_linear(psi_db), self.eta)
            .map_err(|e| CliError::Config(format!("system configuration: {e}")))
    }

    pub fn system(&self) -> Result<SystemConfig, CliError> {
        self.system_at(self.pm_db, self.psi_db)
    }

    /// Resolved spec as `key = value` lines, parseable by [`parse_config`].
    pub fn to_lines(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let ulist = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut out = vec![
            format!("experiment = {}", self.experiment),
            format!("F = {}", self.total),
            format!("Fs = {}", self.su_subcarriers),
            format!("Fp = {}", ulist(&self.pu_subcarriers)),
            format!("Pm_dB = {}", self.pm_db),
            format!("Pn_dB = {}", list(&self.pn_db)),
            format!("psi_dB = {}", self.psi_db),
            format!("eta = {}", self.eta),
            format!("M = {}", ulist(&self.users)),
            format!("M_hat = {}", self.selections),
            format!("replications = {}", self.replications),
            format!("seed = {}", self.seed),
            format!("h = {}", self.series_terms),
            format!("Np = {}", self.rule_order),
            format!("grid = {}", list(&self.grid)),
            format!("curves = {}", list(&self.curves)),
        ];
        if let Some(p) = &self.out {
            out.push(format!("out = {}", p.display()));
        }
        out
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn line_err(line: usize, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {msg}"))
}

fn parse_one<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<T, CliError> {
    e.value.trim().parse().map_err(|_| line_err(e.line, format!("cannot parse `{}` as a value for {key}", e.value)))
}

fn parse_list<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<Vec<T>, CliError> {
    if e.value.trim().is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|p| {
            p.trim().parse().map_err(|_| line_err(e.line, format!("cannot parse `{}` in the list for {key}", p.trim())))
        })
        .collect()
}

/// Parse and validate a configuration document. Lines are `key = value`;
/// `#` starts a comment; lists are comma separated.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, CliError> {
    let mut entries: HashMap<String, Entry> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| line_err(line, "expected `key = value`"))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(line_err(line, format!("unknown key `{k}`")));
        }
        if let Some(prev) = entries.get(k) {
            return Err(line_err(line, format!("duplicate key `{k}` (first set on line {})", prev.line)));
        }
        entries.insert(k.to_string(), Entry { line, value: v.trim().to_string() });
    }

    let exp_entry = entries.get("experiment").ok_or_else(|| CliError::Config("missing key `experiment`".into()))?;
    let experiment: Experiment = exp_entry
        .value
        .parse()
        .map_err(|_| line_err(exp_entry.line, format!("unknown experiment `{}`", exp_entry.value)))?;
    let mut s = ExperimentSpec::defaults(experiment);

    if let Some(e) = entries.get("F") {
        s.total = parse_one("F", e)?;
    }
    if let Some(e) = entries.get("Fs") {
        s.su_subcarriers = parse_one("Fs", e)?;
    }
    if let Some(e) = entries.get("Fp") {
        s.pu_subcarriers = parse_list("Fp", e)?;
    }
    if let Some(e) = entries.get("Pm_dB") {
        s.pm_db = parse_one("Pm_dB", e)?;
    }
    if let Some(e) = entries.get("Pn_dB") {
        s.pn_db = parse_list("Pn_dB", e)?;
    }
    if let Some(e) = entries.get("psi_dB") {
        s.psi_db = parse_one("psi_dB", e)?;
    }
    if let Some(e) = entries.get("eta") {
        s.eta = parse_one("eta", e)?;
    }
    if let Some(e) = entries.get("M") {
        s.users = parse_list("M", e)?;
    }
    if let Some(e) = entries.get("M_hat") {
        s.selections = parse_one("M_hat", e)?;
    }
    if let Some(e) = entries.get("replications") {
        s.replications = parse_one("replications", e)?;
    }
    if let Some(e) = entries.get("seed") {
        s.seed = parse_one("seed", e)?;
    }
    if let Some(e) = entries.get("h") {
        s.series_terms = parse_one("h", e)?;
    }
    if let Some(e) = entries.get("Np") {
        s.rule_order = parse_one("Np", e)?;
    }
    if let Some(e) = entries.get("out") {
        s.out = Some(PathBuf::from(&e.value));
    }
    if let Some(e) = entries.get("grid") {
        s.grid = parse_list("grid", e)?;
    }
    if let Some(e) = entries.get("curves") {
        s.curves = parse_list("curves", e)?;
    }

    // a single PU power is shared by every PU
    if s.pn_db.len() == 1 && s.pu_subcarriers.len() > 1 {
        s.pn_db = vec![s.pn_db[0]; s.pu_subcarriers.len()];
    }
    validate(&s, &|k: &str| entries.get(k).map(|e| e.line))
}

fn anchor(line: Option<usize>, msg: String) -> CliError {
    match line {
        Some(l) => line_err(l, msg),
        None => CliError::Config(format!("defaults: {msg}")),
    }
}

/// Check the invariants of a resolved spec. `line_of` maps a key to the
/// line that set it, if any.
pub fn validate(s: &ExperimentSpec, line_of: &dyn Fn(&str) -> Option<usize>) -> Result<ExperimentSpec, CliError> {
    let fail = |key: &str, msg: String| Err(anchor(line_of(key), msg));
    if s.total == 0 {
        return fail("F", "F must be positive".into());
    }
    if s.su_subcarriers == 0 || s.su_subcarriers > s.total {
        return fail(
            "Fs",
            format!("Fs = {} violates the SystemConfig invariant 1 <= Fs <= F (F = {})", s.su_subcarriers, s.total),
        );
    }
    let occupied: u64 = s.pu_subcarriers.iter().map(|&c| c as u64).sum();
    if s.pu_subcarriers.is_empty() {
        return fail("Fp", "Fp needs at least one entry (use 0 for no primary traffic)".into());
    }
    if occupied > s.total as u64 && s.experiment != Experiment::Fig7 {
        return fail("Fp", format!("PU subcarriers sum to {occupied}, more than F = {}", s.total));
    }
    if s.pn_db.len() != s.pu_subcarriers.len() {
        return fail(
            "Pn_dB",
            format!("{} PU powers given for {} primary users", s.pn_db.len(), s.pu_subcarriers.len()),
        );
    }
    if s.eta <= 0.0 || !s.eta.is_finite() {
        return fail("eta", format!("eta = {} must be positive and finite", s.eta));
    }
    for (k, v) in [("Pm_dB", s.pm_db), ("psi_dB", s.psi_db)] {
        if !v.is_finite() {
            return fail(k, format!("{k} must be finite"));
        }
    }
    if s.pn_db.iter().any(|v| !v.is_finite()) {
        return fail("Pn_dB", "Pn_dB entries must be finite".into());
    }
    if s.series_terms == 0 {
        return fail("h", "h must be at least 1".into());
    }
    if s.rule_order < 2 {
        return fail("Np", "Np must be at least 2".into());
    }
    if s.grid.iter().any(|v| !v.is_finite()) {
        return fail("grid", "grid entries must be finite".into());
    }
    if s.curves.iter().any(|v| !v.is_finite()) {
        return fail("curves", "curves entries must be finite".into());
    }
    match s.experiment {
        Experiment::Fig8 => {
            if s.users.is_empty() {
                return fail("M", "M needs at least one user count".into());
            }
            if s.selections == 0 {
                return fail("M_hat", "M_hat must be positive".into());
            }
            if let Some(&m) = s.users.iter().find(|&&m| m < s.selections) {
                return fail("M", format!("M = {m} is smaller than M_hat = {}", s.selections));
            }
            if s.selections as u64 * s.su_subcarriers as u64 > s.total as u64 {
                return fail(
                    "M_hat",
                    format!(
                        "M_hat * Fs = {} exceeds F = {}; orthogonal allocation is infeasible",
                        s.selections as u64 * s.su_subcarriers as u64,
                        s.total
                    ),
                );
            }
        }
        Experiment::Fig6 => {
            if s.curves.iter().any(|&n| n < 1.0 || n.fract() != 0.0) {
                return fail("curves", "PU counts must be positive integers".into());
            }
            if s.pu_subcarriers.len() != 1 {
                return fail("Fp", "fig6 takes the per-PU subcarrier count as a single value".into());
            }
            for &n in &s.curves {
                if n * s.pu_subcarriers[0] as f64 > s.total as f64 {
                    return fail("curves", format!("{n} PUs with {} subcarriers each exceed F", s.pu_subcarriers[0]));
                }
            }
        }
        Experiment::Fig7 => {
            if s.pu_subcarriers.len() != 1 {
                return fail("Fp", "fig7 takes a single primary user".into());
            }
            if s.grid.iter().any(|&f| f < 1.0 || f.fract() != 0.0) {
                return fail("grid", "values of F must be positive integers".into());
            }
            for &f in &s.grid {
                if (s.su_subcarriers as f64) > f {
                    return fail("grid", format!("F = {f} is below Fs = {}", s.su_subcarriers));
                }
                for &p in &s.curves {
                    if p < 0.0 || p.fract() != 0.0 || p > f {
                        return fail("curves", format!("Fp = {p} must be an integer in 0..=F (F = {f})"));
                    }
                }
            }
        }
        _ => {}
    }
    Ok(s.clone())
}
