//! Grid runner for the probit study: sweep a grid of true-model coefficients
//! and event rates, evaluate every scenario, and summarize how the three
//! incremental-value metrics (ΔAUC, ΔAP, ΔsBrS) behave and agree.
//!
//! Agreement between a pair of metrics is measured two ways, per event rate:
//! Pearson correlation of the raw values, and sign concordance — the fraction
//! of scenarios where both metrics land in the same class (`> 0` versus
//! `<= 0`) minus the fraction where they disagree.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probit::{evaluate_scenario, ScenarioResult};

/// Incremental values this close to zero are classified as `<= 0` by
/// [`concordance`], so quadrature noise cannot flip a scenario's sign class.
const SIGN_EPS: f64 = 1e-12;

/// Coefficient and event-rate lists whose Cartesian product defines the
/// scenarios to evaluate. The defaults are the study grid: slopes 0.3–1.0 in
/// steps of 0.1, interactions ±0.1–±0.5, event rates
/// {0.01, 0.05, 0.1, 0.2, 0.5} — 3,200 scenarios.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_slopes")]
    pub beta1: Vec<f64>,
    #[serde(default = "default_slopes")]
    pub beta2: Vec<f64>,
    #[serde(default = "default_interactions")]
    pub beta3: Vec<f64>,
    #[serde(default = "default_rates")]
    pub pi: Vec<f64>,
}

fn default_slopes() -> Vec<f64> {
    (3..=10).map(|i| i as f64 / 10.0).collect()
}

fn default_interactions() -> Vec<f64> {
    let neg = (1..=5).map(|i| -(i as f64) / 10.0);
    let pos = (1..=5).map(|i| i as f64 / 10.0);
    neg.chain(pos).collect()
}

fn default_rates() -> Vec<f64> {
    vec![0.01, 0.05, 0.1, 0.2, 0.5]
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            beta1: default_slopes(),
            beta2: default_slopes(),
            beta3: default_interactions(),
            pi: default_rates(),
        }
    }
}

impl GridSpec {
    /// Companion grid where the two-marker working model is correctly
    /// specified: same slopes and event rates, interaction pinned at zero
    /// (320 scenarios).
    pub fn beta3_zero() -> Self {
        GridSpec {
            beta3: vec![0.0],
            ..GridSpec::default()
        }
    }

    pub fn scenario_count(&self) -> usize {
        self.beta1.len() * self.beta2.len() * self.beta3.len() * self.pi.len()
    }

    fn validate(&self) -> Result<()> {
        let lists = [
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("beta3", &self.beta3),
            ("pi", &self.pi),
        ];
        for (name, values) in lists {
            if values.is_empty() {
                return Err(Error::InvalidInput(format!("grid list {name} is empty")));
            }
            if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "grid list {name} contains non-finite value {v}"
                )));
            }
        }
        if let Some(p) = self.pi.iter().find(|p| !(0.0 < **p && **p < 1.0)) {
            return Err(Error::InvalidInput(format!(
                "event rate {p} is outside (0, 1)"
            )));
        }
        Ok(())
    }
}

/// A scenario that could not be evaluated: its grid coordinates plus the
/// error message. Failures are excluded from summaries but reported so a
/// partial run stays interpretable.
#[derive(Debug, Clone, Serialize)]
pub struct GridFailure {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub pi: f64,
    pub message: String,
}

/// Outcome of a grid sweep. `results` follows the deterministic grid order
/// (pi outermost, then beta3, beta1, beta2) regardless of how many threads
/// evaluated scenarios.
#[derive(Debug, Clone)]
pub struct GridRun {
    pub results: Vec<ScenarioResult>,
    pub failures: Vec<GridFailure>,
}

pub fn run_grid(spec: &GridSpec) -> Result<GridRun> {
    spec.validate()?;
    let mut coords = Vec::with_capacity(spec.scenario_count());
    for &pi in &spec.pi {
        for &b3 in &spec.beta3 {
            for &b1 in &spec.beta1 {
                for &b2 in &spec.beta2 {
                    coords.push((b1, b2, b3, pi));
                }
            }
        }
    }
    let outcomes: Vec<_> = coords
        .par_iter()
        .map(|&(b1, b2, b3, pi)| evaluate_scenario(b1, b2, b3, pi))
        .collect();
    let mut run = GridRun {
        results: Vec::with_capacity(coords.len()),
        failures: Vec::new(),
    };
    for ((b1, b2, b3, pi), outcome) in coords.into_iter().zip(outcomes) {
        match outcome {
            Ok(r) => run.results.push(r),
            Err(e) => run.failures.push(GridFailure {
                beta1: b1,
                beta2: b2,
                beta3: b3,
                pi,
                message: e.to_string(),
            }),
        }
    }
    Ok(run)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "correlation needs equally long inputs, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput(
            "correlation needs at least two points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidInput(
            "correlation undefined: an input has zero variance".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Sign concordance of two series: (#concordant − #discordant) / n, where a
/// pair is concordant when both values are `> 0` or both are `<= 0`.
pub fn concordance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "concordance needs equally long inputs, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.is_empty() {
        return Err(Error::InvalidInput(
            "concordance needs at least one point".into(),
        ));
    }
    let agree = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| (**x > SIGN_EPS) == (**y > SIGN_EPS))
        .count();
    let n = xs.len() as f64;
    Ok((2.0 * agree as f64 - n) / n)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

// Linear-interpolation quantile (R type 7) of an ascending-sorted slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn five_number_summary(values: &[f64]) -> Result<FiveNumber> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "five-number summary of an empty sample".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(FiveNumber {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// One value per metric pair, in a fixed order.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricPairs<T> {
    pub sbrs_ap: T,
    pub sbrs_auc: T,
    pub auc_ap: T,
}

/// Distribution and agreement statistics for the scenarios sharing one event
/// rate. Pearson entries are `None` when undefined (fewer than two scenarios
/// or a zero-variance metric).
#[derive(Debug, Clone, Serialize)]
pub struct PiSummary {
    pub pi: f64,
    pub n: usize,
    pub delta_auc: FiveNumber,
    pub delta_ap: FiveNumber,
    pub delta_sbrs: FiveNumber,
    pub pearson: MetricPairs<Option<f64>>,
    pub concordance: MetricPairs<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NegativeCounts {
    pub delta_auc: usize,
    pub delta_ap: usize,
    pub delta_sbrs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub scenarios: usize,
    /// How many scenarios (across all event rates) had a strictly negative
    /// incremental value, per metric.
    pub negative: NegativeCounts,
    /// Keyed by event rate.
    pub per_pi: BTreeMap<String, PiSummary>,
    pub failures: Vec<GridFailure>,
}

pub fn summarize(run: &GridRun) -> GridSummary {
    let results = &run.results;
    let negative = NegativeCounts {
        delta_auc: results.iter().filter(|r| r.delta_auc < 0.0).count(),
        delta_ap: results.iter().filter(|r| r.delta_ap < 0.0).count(),
        delta_sbrs: results.iter().filter(|r| r.delta_sbrs < 0.0).count(),
    };
    let mut rates: Vec<f64> = results.iter().map(|r| r.pi).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    let mut per_pi = BTreeMap::new();
    for pi in rates {
        let group: Vec<&ScenarioResult> = results.iter().filter(|r| r.pi == pi).collect();
        let da: Vec<f64> = group.iter().map(|r| r.delta_auc).collect();
        let dp: Vec<f64> = group.iter().map(|r| r.delta_ap).collect();
        let ds: Vec<f64> = group.iter().map(|r| r.delta_sbrs).collect();
        per_pi.insert(
            pi.to_string(),
            PiSummary {
                pi,
                n: group.len(),
                delta_auc: five_number_summary(&da).expect("group is non-empty"),
                delta_ap: five_number_summary(&dp).expect("group is non-empty"),
                delta_sbrs: five_number_summary(&ds).expect("group is non-empty"),
                pearson: MetricPairs {
                    sbrs_ap: pearson(&ds, &dp).ok(),
                    sbrs_auc: pearson(&ds, &da).ok(),
                    auc_ap: pearson(&da, &dp).ok(),
                },
                concordance: MetricPairs {
                    sbrs_ap: concordance(&ds, &dp).expect("group is non-empty"),
                    sbrs_auc: concordance(&ds, &da).expect("group is non-empty"),
                    auc_ap: concordance(&da, &dp).expect("group is non-empty"),
                },
            },
        );
    }
    GridSummary {
        scenarios: results.len(),
        negative,
        per_pi,
        failures: run.failures.clone(),
    }
}

/// Write one CSV row per scenario. Numbers are printed with Rust's shortest
/// round-trip float formatting, so output is deterministic and lossless.
pub fn write_results_csv<W: Write>(results: &[ScenarioResult], mut out: W) -> Result<()> {
    writeln!(
        out,
        "beta0,beta1,beta2,beta3,pi,auc1,auc2,ap1,ap2,sbrs1,sbrs2,d_auc,d_ap,d_sbrs"
    )?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.beta[0],
            r.beta[1],
            r.beta[2],
            r.beta[3],
            r.pi,
            r.auc_one,
            r.auc_two,
            r.ap_one,
            r.ap_two,
            r.sbrs_one,
            r.sbrs_two,
            r.delta_auc,
            r.delta_ap,
            r.delta_sbrs
        )?;
    }
    Ok(())
}

pub fn write_summary_json<W: Write>(summary: &GridSummary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    out.write_all(b"\n")?;
    Ok(())
}
