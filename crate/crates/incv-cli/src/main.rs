//! Command-line front end for the `incv` library: evaluate risk-model metrics
//! on labeled CSV cohorts, emit comparison curves, run analytic probit
//! scenarios and scenario grids, and draw synthetic cohorts.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Deserialize;
use serde_json::json;

use incv::distributions::GaussianPair;
use incv::empirical::{self, MetricTriple, Ties};
use incv::probit::{evaluate_scenario, ScenarioSpec};
use incv::sim;
use incv::study::{self, GridSpec};

#[derive(Parser)]
#[command(
    name = "incv",
    version,
    about = "Incremental-value metrics for binary-outcome risk models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute AUC, AP, and scaled Brier score for one or two model columns
    Evaluate {
        /// CSV file with a header row
        #[arg(long)]
        data: PathBuf,
        /// Name of the 0/1 outcome column
        #[arg(long)]
        label: String,
        /// Score column of the baseline model
        #[arg(long)]
        old: String,
        /// Score column of the comparison model; omit for single-model metrics
        #[arg(long)]
        new: Option<String>,
        /// How tied scores contribute to the AUC
        #[arg(long, value_enum, default_value_t)]
        ties: TiesArg,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit difference/weight curves and ROC/PR points for an old/new pair
    Curves {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        old: String,
        #[arg(long)]
        new: String,
        /// Number of interior quantile levels to evaluate
        #[arg(long, default_value_t = 99)]
        alpha_points: usize,
        /// Output directory (created if missing)
        #[arg(long)]
        out: PathBuf,
    },
    /// Analytically evaluate one true-model scenario
    Scenario {
        #[arg(long, allow_negative_numbers = true)]
        beta1: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta2: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta3: f64,
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario grid and write results.csv + summary.json
    Grid {
        /// JSON file with any of beta1/beta2/beta3/pi lists; omitted fields
        /// use the default study grid
        #[arg(long)]
        grid_config: Option<PathBuf>,
        /// Output directory (created if missing)
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a labeled synthetic cohort with a fixed seed
    Simulate {
        #[arg(long)]
        seed: u64,
        /// Number of subjects (at least 2)
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// JSON file describing the two Gaussian score models; defaults to
        /// the built-in example pair
        #[arg(long)]
        gaussian_config: Option<PathBuf>,
        /// Draw from a probit scenario instead (requires all four values)
        #[arg(long, allow_negative_numbers = true)]
        beta1: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta2: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta3: Option<f64>,
        #[arg(long)]
        pi: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum TiesArg {
    #[default]
    Strict,
    Midrank,
}

impl TiesArg {
    fn to_lib(self) -> Ties {
        match self {
            TiesArg::Strict => Ties::Strict,
            TiesArg::Midrank => Ties::Midrank,
        }
    }

    fn name(self) -> &'static str {
        match self {
            TiesArg::Strict => "strict",
            TiesArg::Midrank => "midrank",
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match err.downcast_ref::<incv::Error>() {
                // library errors already format their cause chain
                Some(lib_err) => {
                    eprintln!("error: {lib_err}");
                    ExitCode::from(if lib_err.is_input_error() { 2 } else { 3 })
                }
                None => {
                    eprintln!("error: {err:#}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Evaluate {
            data,
            label,
            old,
            new,
            ties,
            out,
        } => cmd_evaluate(&data, &label, &old, new.as_deref(), ties, out.as_deref()),
        Command::Curves {
            data,
            label,
            old,
            new,
            alpha_points,
            out,
        } => cmd_curves(&data, &label, &old, &new, alpha_points, &out),
        Command::Scenario {
            beta1,
            beta2,
            beta3,
            pi,
            out,
        } => cmd_scenario(beta1, beta2, beta3, pi, out.as_deref()),
        Command::Grid { grid_config, out } => cmd_grid(grid_config.as_deref(), &out),
        Command::Simulate {
            seed,
            n,
            out,
            gaussian_config,
            beta1,
            beta2,
            beta3,
            pi,
        } => cmd_simulate(
            seed,
            n,
            &out,
            gaussian_config.as_deref(),
            [beta1, beta2, beta3, pi],
        ),
    }
}

// ---------------------------------------------------------------------------
// evaluate

fn cmd_evaluate(
    data: &Path,
    label: &str,
    old: &str,
    new: Option<&str>,
    ties: TiesArg,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let mut wanted = vec![old.to_string()];
    if let Some(n) = new {
        wanted.push(n.to_string());
    }
    let cohort = read_cohort(data, label, &wanted)?;
    let events = cohort.labels.iter().filter(|l| **l == 1).count();
    let mut report = json!({
        "n": cohort.labels.len(),
        "events": events,
        "event_rate": events as f64 / cohort.labels.len() as f64,
        "ties": ties.name(),
        "old": model_report(old, empirical::metric_triple(&cohort.labels, &cohort.columns[0], ties.to_lib())?),
    });
    if let Some(new_name) = new {
        let incv = empirical::incremental_value(
            &cohort.labels,
            &cohort.columns[0],
            &cohort.columns[1],
            ties.to_lib(),
        )?;
        report["new"] = model_report(new_name, incv.new);
        report["delta"] = json!({
            "auc": incv.delta_auc,
            "ap": incv.delta_ap,
            "sbrs": incv.delta_sbrs,
        });
    }
    round_numbers(&mut report);
    write_json(&report, out)
}

fn model_report(column: &str, triple: MetricTriple) -> serde_json::Value {
    json!({
        "column": column,
        "auc": triple.auc,
        "ap": triple.ap,
        "sbrs": triple.sbrs,
    })
}

// ---------------------------------------------------------------------------
// curves

fn cmd_curves(
    data: &Path,
    label: &str,
    old: &str,
    new: &str,
    alpha_points: usize,
    out: &Path,
) -> anyhow::Result<()> {
    if alpha_points == 0 {
        bail!("--alpha-points must be at least 1");
    }
    let cohort = read_cohort(data, label, &[old.to_string(), new.to_string()])?;
    let (labels, old_scores, new_scores) = (&cohort.labels, &cohort.columns[0], &cohort.columns[1]);
    let alphas: Vec<f64> = (1..=alpha_points)
        .map(|i| i as f64 / (alpha_points + 1) as f64)
        .collect();
    let delta = empirical::delta_alpha_curve(labels, old_scores, new_scores, &alphas)?;
    let weight = empirical::ap_weight_curve(labels, old_scores, new_scores, &alphas)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;

    let mut w = file_writer(&out.join("curves.csv"))?;
    writeln!(w, "alpha,delta,w_ap,weighted")?;
    for ((a, d), wgt) in alphas.iter().zip(&delta).zip(&weight) {
        writeln!(w, "{a},{d},{wgt},{}", wgt * d)?;
    }
    w.flush()?;

    for (name, scores) in [("old", old_scores), ("new", new_scores)] {
        let mut w = file_writer(&out.join(format!("roc_{name}.csv")))?;
        writeln!(w, "fpr,tpr")?;
        for (fpr, tpr) in empirical::roc_points(labels, scores)? {
            writeln!(w, "{fpr},{tpr}")?;
        }
        w.flush()?;
        let mut w = file_writer(&out.join(format!("pr_{name}.csv")))?;
        writeln!(w, "recall,precision")?;
        for (recall, precision) in empirical::pr_points(labels, scores)? {
            writeln!(w, "{recall},{precision}")?;
        }
        w.flush()?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scenario & grid

fn cmd_scenario(
    beta1: f64,
    beta2: f64,
    beta3: f64,
    pi: f64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let result = evaluate_scenario(beta1, beta2, beta3, pi)?;
    let mut report = serde_json::to_value(&result)?;
    round_numbers(&mut report);
    write_json(&report, out)
}

fn cmd_grid(grid_config: Option<&Path>, out: &Path) -> anyhow::Result<()> {
    let spec: GridSpec = match grid_config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("invalid grid config {}", path.display()))?
        }
        None => GridSpec::default(),
    };
    eprintln!("evaluating {} scenarios...", spec.scenario_count());
    let run = study::run_grid(&spec)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;

    let mut csv_bytes = Vec::new();
    study::write_results_csv(&run.results, &mut csv_bytes)?;
    fs::write(out.join("results.csv"), csv_bytes)?;

    let mut json_bytes = Vec::new();
    study::write_summary_json(&study::summarize(&run), &mut json_bytes)?;
    fs::write(out.join("summary.json"), json_bytes)?;

    eprintln!(
        "wrote {} results ({} failures) to {}",
        run.results.len(),
        run.failures.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate

/// Class-conditional score model: `N(event_mean, event_sd^2)` among events,
/// `N(nonevent_mean, nonevent_sd^2)` among non-events.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelConfig {
    event_mean: f64,
    event_sd: f64,
    nonevent_mean: f64,
    nonevent_sd: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianConfig {
    pi: f64,
    old: ModelConfig,
    new: ModelConfig,
}

impl ModelConfig {
    fn to_pair(self, pi: f64) -> anyhow::Result<GaussianPair> {
        if !(self.event_sd > 0.0 && self.nonevent_sd > 0.0) {
            bail!(
                "standard deviations must be positive, got event_sd={}, nonevent_sd={}",
                self.event_sd,
                self.nonevent_sd
            );
        }
        Ok(GaussianPair::new(
            self.event_mean,
            self.event_sd * self.event_sd,
            self.nonevent_mean,
            self.nonevent_sd * self.nonevent_sd,
            pi,
        )?)
    }
}

/// The worked example pair: the old model separates the upper tail better,
/// the new one has slightly higher AUC but clearly lower AP.
fn default_gaussian_config() -> GaussianConfig {
    GaussianConfig {
        pi: 0.05,
        old: ModelConfig {
            event_mean: 1.8,
            event_sd: 2.0,
            nonevent_mean: 0.0,
            nonevent_sd: 1.0,
        },
        new: ModelConfig {
            event_mean: 1.5,
            event_sd: 1.5,
            nonevent_mean: 0.0,
            nonevent_sd: 1.0,
        },
    }
}

fn cmd_simulate(
    seed: u64,
    n: usize,
    out: &Path,
    gaussian_config: Option<&Path>,
    betas: [Option<f64>; 4],
) -> anyhow::Result<()> {
    if n < 2 {
        bail!("cohort size must be at least 2, got {n}");
    }
    let given = betas.iter().filter(|b| b.is_some()).count();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    match (gaussian_config, given) {
        (Some(_), g) if g > 0 => {
            bail!("--gaussian-config conflicts with --beta1/--beta2/--beta3/--pi")
        }
        (None, g) if g > 0 && g < 4 => {
            bail!("scenario simulation needs all of --beta1, --beta2, --beta3, --pi")
        }
        (None, 4) => {
            let [b1, b2, b3, pi] = betas.map(|b| b.expect("all four checked present"));
            let spec = ScenarioSpec::new(b1, b2, b3, pi)?;
            let (gamma_one, _) = spec.fit_one_marker()?;
            let (gamma_two, _) = spec.fit_two_marker()?;
            let rows = sim::simulate_probit(&spec.beta, &gamma_one, &gamma_two, n, &mut rng)?;
            let mut w = file_writer(out)?;
            writeln!(w, "label,x,y,p_true,p_one,p_two")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    r.d, r.x, r.y, r.p_true, r.p_one, r.p_two
                )?;
            }
            w.flush()?;
        }
        _ => {
            let config = match gaussian_config {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("cannot read {}", path.display()))?;
                    serde_json::from_str(&text)
                        .with_context(|| format!("invalid gaussian config {}", path.display()))?
                }
                None => default_gaussian_config(),
            };
            let old = config.old.to_pair(config.pi)?;
            let new = config.new.to_pair(config.pi)?;
            let cohort = sim::sample_gaussian_cohort(&old, &new, n, &mut rng)?;
            let mut w = file_writer(out)?;
            writeln!(w, "label,old,new")?;
            for i in 0..cohort.labels.len() {
                writeln!(
                    w,
                    "{},{},{}",
                    cohort.labels[i], cohort.old_scores[i], cohort.new_scores[i]
                )?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shared plumbing

struct CohortData {
    labels: Vec<u8>,
    /// One vector per requested score column, in request order.
    columns: Vec<Vec<f64>>,
}

fn read_cohort(path: &Path, label: &str, score_columns: &[String]) -> anyhow::Result<CohortData> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader
        .headers()
        .with_context(|| format!("cannot read header of {}", path.display()))?
        .clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            anyhow!(
                "column '{}' not found; available columns: {}",
                name,
                headers.iter().collect::<Vec<_>>().join(", ")
            )
        })
    };
    let label_idx = find(label)?;
    let score_idx = score_columns
        .iter()
        .map(|c| find(c))
        .collect::<anyhow::Result<Vec<usize>>>()?;

    let mut labels = Vec::new();
    let mut columns = vec![Vec::new(); score_idx.len()];
    for record in reader.records() {
        let record = record.context("malformed csv record")?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let raw = &record[label_idx];
        // guards rather than float literal patterns: the latter are deprecated
        #[allow(clippy::redundant_guards)]
        labels.push(match raw.parse::<f64>() {
            Ok(v) if v == 0.0 => 0,
            Ok(v) if v == 1.0 => 1,
            _ => bail!("line {line}: label '{raw}' is not 0 or 1"),
        });
        for (values, &idx) in columns.iter_mut().zip(&score_idx) {
            let raw = &record[idx];
            let value: f64 = raw.parse().map_err(|_| {
                anyhow!(
                    "line {line}: cannot parse '{raw}' in column '{}' as a number",
                    &headers[idx]
                )
            })?;
            if !value.is_finite() {
                bail!(
                    "line {line}: column '{}' has non-finite value '{raw}'",
                    &headers[idx]
                );
            }
            values.push(value);
        }
    }
    if labels.is_empty() {
        bail!("{} has no data rows", path.display());
    }
    Ok(CohortData { labels, columns })
}

fn file_writer(path: &Path) -> anyhow::Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).with_context(
        || format!("cannot write {}", path.display()),
    )?))
}

fn write_json(value: &serde_json::Value, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Round to six significant digits so reports are compact and stable across
/// platforms; counts (JSON integers) are left untouched.
fn round_sig6(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}")
        .parse()
        .expect("scientific notation round-trips")
}

fn round_numbers(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                let rounded = round_sig6(n.as_f64().expect("checked f64"));
                if let Some(num) = serde_json::Number::from_f64(rounded) {
                    *value = serde_json::Value::Number(num);
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_numbers),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}
