//! Verification harness: seeded suites that check every identity and
//! explicit-constant inequality of the library, with JSON and CSV reports.

pub mod gen;
mod khinchin;
mod suites;

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;
use std::time::Instant;

use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::phase::{gaussian_window, Signal};
use crate::weights::{moderateness_constant, weight_polynomial, Weight};

pub use khinchin::{khinchin_exact, Khinchin, KHINCHIN_MAX_TERMS};

/// Registered suite names, in reporting order.
pub const SUITES: [&str; 15] = [
    "moyal",
    "isometry",
    "reconstruction",
    "trace-lemma",
    "sandwich",
    "schatten-embed",
    "window-independence",
    "cohen",
    "localization",
    "amalgam",
    "khinchin",
    "young",
    "dominance",
    "ft-product",
    "nuclear",
];

/// Suites whose cost grows like N^4 or faster; subject to [`RunConfig::max_n4`].
pub const N4_SUITES: [&str; 2] = ["localization", "amalgam"];

/// Default cap on N for the suites in [`N4_SUITES`].
pub const DEFAULT_MAX_N4: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub max_n4: usize,
    /// Record wall-clock time in the report. Off by default so that reports
    /// are byte-identical across runs.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_n4: DEFAULT_MAX_N4,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Worst residual (or violation) over all instances.
    pub residual: f64,
    pub tolerance: f64,
    /// Instance index and parameters that produced the worst residual.
    pub witness: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub prng: String,
    pub checks: Vec<Check>,
    pub constants: BTreeMap<String, f64>,
    pub wall_ms: u64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Header plus one row per check.
    pub fn to_csv(&self) -> String {
        reports_to_csv(std::slice::from_ref(self))
    }

    /// One line per suite: status, counts and the worst relative residual.
    pub fn summary(&self) -> String {
        let worst =
            self.checks
                .iter()
                .map(|c| (c.name.as_str(), c.residual))
                .fold(None::<(&str, f64)>, |acc, (name, r)| match acc {
                    Some((_, best)) if r <= best || (r.is_nan() && best.is_nan()) => acc,
                    _ => Some((name, r)),
                });
        let worst = match worst {
            Some((name, r)) => format!("worst residual {r:.3e} ({name})"),
            None => "no checks".into(),
        };
        format!(
            "{:<20} n={:<3} {} {}/{} checks passed, {}",
            self.suite,
            self.n,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len() - self.failures(),
            self.checks.len(),
            worst
        )
    }
}

pub fn reports_to_csv(reports: &[SuiteReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "suite",
        "n",
        "trials",
        "seed",
        "check",
        "status",
        "residual",
        "tolerance",
        "witness",
    ])
    .expect("in-memory write");
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.suite.clone(),
                r.n.to_string(),
                r.trials.to_string(),
                r.seed.to_string(),
                c.name.clone(),
                match c.status {
                    Status::Pass => "pass".into(),
                    Status::Fail => "fail".into(),
                },
                format!("{:e}", c.residual),
                format!("{:e}", c.tolerance),
                serde_json::to_string(&c.witness).expect("witness serializes"),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Check(f64),
    Max,
    Min,
}

#[derive(Debug, Clone)]
struct Measure {
    name: String,
    value: f64,
    kind: Kind,
    params: Vec<(String, Value)>,
}

/// Data shared by all instances of one suite run.
pub(crate) struct Shared {
    pub n: usize,
    pub g0: Signal,
    /// Reference submultiplicative weight v = (1 + d)^2.
    pub v: Weight,
    moderate: OnceLock<Result<Vec<(String, Weight, f64)>>>,
}

impl Shared {
    fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            g0: gaussian_window(n)?,
            v: weight_polynomial(n, 2.0)?,
            moderate: OnceLock::new(),
        })
    }

    /// The weights m in {1, (1+d), (1+d)^2, (1+d)^{-2}} with their exact
    /// moderateness constants relative to v.
    pub fn moderate_weights(&self) -> Result<&[(String, Weight, f64)]> {
        let cached = self.moderate.get_or_init(|| {
            let n = self.n;
            let ms = vec![
                ("1".to_string(), Weight::constant(n)?),
                ("poly1".to_string(), weight_polynomial(n, 1.0)?),
                ("poly2".to_string(), weight_polynomial(n, 2.0)?),
                ("inv-poly2".to_string(), weight_polynomial(n, 2.0)?.reciprocal()),
            ];
            ms.into_iter()
                .map(|(name, m)| {
                    let c = moderateness_constant(&m, &self.v)?;
                    Ok((name, m, c))
                })
                .collect()
        });
        cached.as_deref().map_err(|e| e.clone())
    }
}

/// Per-instance state: the instance's random stream and its measurements.
pub(crate) struct Ctx<'a> {
    pub n: usize,
    pub instance: usize,
    pub rng: ChaCha20Rng,
    pub shared: &'a Shared,
    out: Vec<Measure>,
}

pub(crate) type Params<'p> = &'p [(&'p str, String)];

fn to_params(params: Params<'_>) -> Vec<(String, Value)> {
    params
        .iter()
        .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
        .collect()
}

impl<'a> Ctx<'a> {
    /// Records a residual that must not exceed `tol`.
    pub fn check(&mut self, name: &str, residual: f64, tol: f64, params: Params<'_>) {
        self.out.push(Measure {
            name: name.to_string(),
            value: residual,
            kind: Kind::Check(tol),
            params: to_params(params),
        });
    }

    /// Records the relative excess max(0, lhs - rhs) / rhs of an inequality lhs <= rhs.
    pub fn check_le(&mut self, name: &str, lhs: f64, rhs: f64, tol: f64, params: Params<'_>) {
        self.check(name, excess(lhs, rhs), tol, params);
    }

    pub fn record_max(&mut self, name: &str, value: f64) {
        self.out.push(Measure {
            name: name.to_string(),
            value,
            kind: Kind::Max,
            params: Vec::new(),
        });
    }

    pub fn record_min(&mut self, name: &str, value: f64) {
        self.out.push(Measure {
            name: name.to_string(),
            value,
            kind: Kind::Min,
            params: Vec::new(),
        });
    }
}

/// Relative violation of lhs <= rhs; a violation with rhs = 0 is infinite.
pub(crate) fn excess(lhs: f64, rhs: f64) -> f64 {
    if lhs.is_nan() || rhs.is_nan() {
        return f64::NAN;
    }
    let d = lhs - rhs;
    if d <= 0.0 {
        0.0
    } else if rhs > 0.0 {
        d / rhs
    } else {
        f64::INFINITY
    }
}

fn validate(name: &str, n: usize, cfg: &RunConfig) -> Result<()> {
    if !SUITES.contains(&name) {
        return Err(Error::UnknownSuite(name.to_string()));
    }
    if n == 0 {
        return Err(Error::InvalidSize(0));
    }
    if N4_SUITES.contains(&name) && n > cfg.max_n4 {
        return Err(Error::Resource {
            what: format!("suite `{name}`"),
            n,
            cap: cfg.max_n4,
        });
    }
    Ok(())
}

fn run_instance(name: &str, shared: &Shared, seed: u64, instance: usize) -> Vec<Measure> {
    let mut ctx = Ctx {
        n: shared.n,
        instance,
        rng: gen::instance_rng(seed, instance),
        shared,
        out: Vec::new(),
    };
    if let Err(e) = suites::dispatch(name, &mut ctx) {
        ctx.check("instance-error", f64::INFINITY, 0.0, &[("error", e.to_string())]);
    }
    ctx.out
}

/// Runs a suite with the default configuration.
pub fn run_suite(name: &str, n: usize, trials: usize, seed: u64) -> Result<SuiteReport> {
    run_suite_with(name, n, trials, seed, &RunConfig::default())
}

pub fn run_suite_with(name: &str, n: usize, trials: usize, seed: u64, cfg: &RunConfig) -> Result<SuiteReport> {
    validate(name, n, cfg)?;
    let start = Instant::now();
    let shared = Shared::new(n)?;
    let results: Vec<Vec<Measure>> = (0..trials)
        .into_par_iter()
        .map(|i| run_instance(name, &shared, seed, i))
        .collect();

    let mut checks: Vec<Check> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut constants: BTreeMap<String, f64> = BTreeMap::new();
    for (instance, measures) in results.into_iter().enumerate() {
        for m in measures {
            match m.kind {
                Kind::Check(tol) => {
                    let worse = |old: f64| m.value > old || (m.value.is_nan() && !old.is_nan());
                    let witness = || {
                        let mut w = Map::new();
                        w.insert("instance".into(), Value::from(instance));
                        for (k, v) in &m.params {
                            w.insert(k.clone(), v.clone());
                        }
                        w
                    };
                    match index.get(&m.name) {
                        Some(&k) => {
                            if worse(checks[k].residual) {
                                checks[k].residual = m.value;
                                checks[k].witness = witness();
                            }
                        }
                        None => {
                            index.insert(m.name.clone(), checks.len());
                            checks.push(Check {
                                name: m.name.clone(),
                                status: Status::Pass,
                                residual: m.value,
                                tolerance: tol,
                                witness: witness(),
                            });
                        }
                    }
                }
                Kind::Max => {
                    let e = constants.entry(m.name).or_insert(f64::NEG_INFINITY);
                    *e = e.max(m.value);
                }
                Kind::Min => {
                    let e = constants.entry(m.name).or_insert(f64::INFINITY);
                    *e = e.min(m.value);
                }
            }
        }
    }
    for c in &mut checks {
        c.status = if c.residual <= c.tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
    }
    Ok(SuiteReport {
        suite: name.to_string(),
        n,
        trials,
        seed,
        prng: gen::PRNG_NAME.to_string(),
        checks,
        constants,
        wall_ms: if cfg.timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Runs every registered suite in order.
pub fn run_all(n: usize, trials: usize, seed: u64, cfg: &RunConfig) -> Result<Vec<SuiteReport>> {
    SUITES.iter().map(|s| run_suite_with(s, n, trials, seed, cfg)).collect()
}

/// Re-runs one instance and returns the worst residual of each check it made.
pub fn replay_instance(
    name: &str,
    n: usize,
    seed: u64,
    instance: usize,
    cfg: &RunConfig,
) -> Result<Vec<(String, f64)>> {
    validate(name, n, cfg)?;
    let shared = Shared::new(n)?;
    let mut worst: Vec<(String, f64)> = Vec::new();
    for m in run_instance(name, &shared, seed, instance) {
        if let Kind::Check(_) = m.kind {
            match worst.iter_mut().find(|(k, _)| *k == m.name) {
                Some((_, r)) => {
                    if m.value > *r || m.value.is_nan() {
                        *r = m.value
                    }
                }
                None => worst.push((m.name, m.value)),
            }
        }
    }
    Ok(worst)
}

/// Reproduces the residual of a check from its witness.
pub fn replay_check(report: &SuiteReport, check: &str, cfg: &RunConfig) -> Result<f64> {
    let c = report
        .checks
        .iter()
        .find(|c| c.name == check)
        .ok_or_else(|| Error::Domain(format!("report has no check `{check}`")))?;
    let instance = c
        .witness
        .get("instance")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Domain("witness lacks an instance index".into()))? as usize;
    replay_instance(&report.suite, report.n, report.seed, instance, cfg)?
        .into_iter()
        .find(|(k, _)| k == check)
        .map(|(_, r)| r)
        .ok_or_else(|| Error::Domain(format!("instance {instance} did not produce `{check}`")))
}

/// Ensemble estimate of a recorded constant. `id` is a constant name as it
/// appears in reports, e.g. `dominance.vector-ratio-max`; the part before the
/// first '.' names the suite that records it.
pub fn estimate_constant(id: &str, n: usize, trials: usize, seed: u64, cfg: &RunConfig) -> Result<f64> {
    let suite = id.split('.').next().unwrap_or(id);
    let report = run_suite_with(suite, n, trials, seed, cfg)?;
    report
        .constants
        .get(id)
        .copied()
        .ok_or_else(|| Error::Domain(format!("suite `{suite}` records no constant `{id}`")))
}
