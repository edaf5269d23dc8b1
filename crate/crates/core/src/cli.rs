//! `dcpriv` command-line surface.
//!
//! Exit codes: 0 success, 2 usage/config, 3 mathematical/domain, 4 I/O,
//! 5 audit verdict `violation_suspected`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::auditor::{
    run_audit, AuditConfig, Mechanism, Verdict, DEFAULT_SLACK, DEFAULT_THRESHOLD_GRID,
};
use crate::calibrator::{calibrate_column, ColumnCalibration, Provenance};
use crate::condenser::{condense, CondenseConfig, CondenseOutput, EmbeddingKind};
use crate::error::{Error, Result};
use crate::model_eval::{compare_utility, evaluate, train, TrainParams};
use crate::report::RunReport;
use crate::rng::{slot_rng, SPLIT_STREAM};
use crate::stats::{ingest_csv, observed_range, Bounds, Dataset, IngestOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 5;

/// Caps the number of threads used for audit trials.
pub const THREADS_ENV: &str = "DCPRIV_THREADS";

/// `<column>=<lower>,<upper>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArg {
    pub column: String,
    pub lower: f64,
    pub upper: f64,
}

impl FromStr for BoundsArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (column, range) = s
            .split_once('=')
            .ok_or_else(|| format!("expected <column>=<lower>,<upper>, got \"{s}\""))?;
        let (lo, hi) = range
            .split_once(',')
            .ok_or_else(|| format!("expected <lower>,<upper> after '=', got \"{range}\""))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("\"{v}\" is not a number"))
        };
        let (lower, upper) = (parse(lo)?, parse(hi)?);
        Bounds::new(lower, upper).map_err(|e| e.to_string())?;
        Ok(Self {
            column: column.trim().to_string(),
            lower,
            upper,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "dcpriv", version, about = "Condense tabular data, calibrate (ε, δ) from inherent noise, and audit ε empirically")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form (ε, δ) per column.
    Calibrate(CalibrateArgs),
    /// Condense a labelled dataset into a small synthetic set.
    Condense(CondenseArgs),
    /// Membership-inference audit of the sum or the condenser.
    Audit(AuditArgs),
    /// Train on one file, evaluate on another.
    Evaluate(EvaluateArgs),
    /// Condense, calibrate, audit and evaluate in one run.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Declared record bounds, repeatable: `--bounds v=0,1`.
    #[arg(long = "bounds", required = true)]
    pub bounds: Vec<BoundsArg>,
    /// Fraction of records known to the attacker.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Columns to calibrate; defaults to every numeric column.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Label column to skip.
    #[arg(long)]
    pub label: Option<String>,
    /// Clip values into the declared bounds instead of rejecting them.
    #[arg(long)]
    pub clip: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondenseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long = "per-class")]
    pub per_class: usize,
    #[arg(long)]
    pub iters: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long = "feature-dim", default_value_t = 32)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long = "bounds")]
    pub bounds: Vec<BoundsArg>,
    #[arg(long)]
    pub clip: bool,
    /// Write the loss trace as a JSON array.
    #[arg(long = "loss-trace")]
    pub loss_trace: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mechanism: Mechanism,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// δ for the empirical estimate; defaults to the closed-form δ.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: f64,
    #[arg(long)]
    pub report: PathBuf,
    /// Audited column; defaults to the first numeric column.
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long = "bounds")]
    pub bounds: Vec<BoundsArg>,
    #[arg(long)]
    pub clip: bool,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_GRID)]
    pub grid: usize,
    #[command(flatten)]
    pub condense: CondenseOpts,
}

/// Condenser settings used inside audits and the pipeline.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondenseOpts {
    #[arg(long = "per-class", default_value_t = 10)]
    pub per_class: usize,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long = "feature-dim", default_value_t = 32)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub epochs: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub lr: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long = "per-class")]
    pub per_class: usize,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long = "feature-dim", default_value_t = 32)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: f64,
    /// Audited column; defaults to the first numeric column.
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long = "bounds")]
    pub bounds: Vec<BoundsArg>,
    #[arg(long)]
    pub clip: bool,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_GRID)]
    pub grid: usize,
    /// Held-out test file; without it a seeded split of the input is used.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long = "test-fraction", default_value_t = 0.25)]
    pub test_fraction: f64,
    /// Also write the synthetic set here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parsed arguments of one command, echoed verbatim into its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Calibrate(CalibrateArgs),
    Condense(CondenseArgs),
    Audit(AuditArgs),
    Evaluate(EvaluateArgs),
    Pipeline(PipelineArgs),
}

impl RunConfig {
    pub fn command_name(&self) -> &'static str {
        match self {
            RunConfig::Calibrate(_) => "calibrate",
            RunConfig::Condense(_) => "condense",
            RunConfig::Audit(_) => "audit",
            RunConfig::Evaluate(_) => "evaluate",
            RunConfig::Pipeline(_) => "pipeline",
        }
    }
}

impl From<Command> for RunConfig {
    fn from(c: Command) -> Self {
        match c {
            Command::Calibrate(a) => RunConfig::Calibrate(a),
            Command::Condense(a) => RunConfig::Condense(a),
            Command::Audit(a) => RunConfig::Audit(a),
            Command::Evaluate(a) => RunConfig::Evaluate(a),
            Command::Pipeline(a) => RunConfig::Pipeline(a),
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Diagnostics go to stderr; reports go to their `--report` path or `stdout`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let config = RunConfig::from(cli.command);
    // Buffered so the closure can cross into the pool.
    let mut buf = Vec::new();
    let result = pool.install(|| execute(&config, &mut buf));
    if let Err(e) = stdout.write_all(&buf).and_then(|_| stdout.flush()) {
        eprintln!("error: cannot write to stdout: {e}");
        return Error::io("<stdout>", e).exit_code();
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::usage(format!("{THREADS_ENV} must be a positive integer, got \"{raw}\"")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::usage(format!("cannot start thread pool: {e}")))
}

/// Runs a parsed configuration. Usable as a library entry point.
pub fn execute(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    match config {
        RunConfig::Calibrate(a) => cmd_calibrate(config, a, stdout),
        RunConfig::Condense(a) => cmd_condense(config, a, stdout),
        RunConfig::Audit(a) => cmd_audit(config, a, stdout),
        RunConfig::Evaluate(a) => cmd_evaluate(config, a, stdout),
        RunConfig::Pipeline(a) => cmd_pipeline(config, a, stdout),
    }
}

fn bounds_map(args: &[BoundsArg]) -> Result<std::collections::BTreeMap<String, Bounds>> {
    let mut map = std::collections::BTreeMap::new();
    for b in args {
        if map
            .insert(b.column.clone(), Bounds::new(b.lower, b.upper)?)
            .is_some()
        {
            return Err(Error::usage(format!("bounds given twice for \"{}\"", b.column)));
        }
    }
    Ok(map)
}

fn load(path: &Path, bounds: &[BoundsArg], label: Option<&str>, clip: bool) -> Result<Dataset> {
    ingest_csv(
        path,
        &IngestOptions {
            bounds: bounds_map(bounds)?,
            label_column: label.map(str::to_string),
            clip,
        },
    )
}

/// Fills undeclared bounds with the observed range and flags each one.
/// Constant columns stay unbounded.
fn infer_bounds(data: &mut Dataset, report: &mut RunReport) {
    for j in 0..data.dim() {
        let col = &data.columns()[j];
        if col.bounds.is_some() {
            continue;
        }
        let (lo, hi) = observed_range(&col.values);
        if let Ok(b) = Bounds::new(lo, hi) {
            report.add_flag(format!("bounds_inferred:{}", col.name));
            data.set_bounds(j, Some(b));
        }
    }
}

#[derive(Serialize)]
struct ColumnResult<'a> {
    column: &'a str,
    bounds: Bounds,
    #[serde(flatten)]
    calibration: ColumnCalibration,
    vacuous_delta: bool,
}

#[derive(Serialize)]
struct WorstCase<'a> {
    column: &'a str,
    epsilon: f64,
}

const THEOREM2_INTERPRETATIONS: [&str; 2] = [
    "D in the relaxed-model delta is the sensitivity",
    "the variance dividing the fourth-moment term is the uncompromised total variance",
];

fn calibrate_columns(
    data: &Dataset,
    columns: Option<&[String]>,
    gamma: f64,
    report: &mut RunReport,
    key: &str,
) -> Result<()> {
    let names: Vec<String> = match columns {
        Some(c) => c.to_vec(),
        None => data.column_names().iter().map(|s| s.to_string()).collect(),
    };
    let mut results = Vec::with_capacity(names.len());
    let mut worst: Option<WorstCase> = None;
    for name in &names {
        let (_, col) = data
            .column(name)
            .ok_or_else(|| Error::usage(format!("unknown column \"{name}\"")))?;
        let cal = calibrate_column(&col.values, col.bounds, gamma).map_err(|e| match e {
            Error::Usage(m) => Error::Usage(format!("{m} (column \"{name}\")")),
            other => other.in_column(name),
        })?;
        if cal.params.is_vacuous() {
            report.add_flag(format!("vacuous_delta:{name}"));
        }
        if worst.as_ref().is_none_or(|w| cal.params.epsilon > w.epsilon) {
            worst = Some(WorstCase {
                column: &col.name,
                epsilon: cal.params.epsilon,
            });
        }
        results.push(ColumnResult {
            column: &col.name,
            bounds: col.bounds.expect("calibrated columns have bounds"),
            vacuous_delta: cal.params.is_vacuous(),
            calibration: cal,
        });
    }
    let relaxed = results
        .iter()
        .any(|r| r.calibration.params.provenance == Provenance::Theorem2);
    let interpretations: &[&str] = if relaxed { &THEOREM2_INTERPRETATIONS } else { &[] };
    report.set_result(
        key,
        serde_json::json!({
            "gamma": gamma,
            "columns": results,
            "worst_case": worst,
            "interpretations": interpretations,
        }),
    )
}

fn cmd_calibrate(config: &RunConfig, a: &CalibrateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let data = load(&a.input, &a.bounds, a.label.as_deref(), a.clip)?;
    let mut report = RunReport::new(config.clone());
    calibrate_columns(&data, a.columns.as_deref(), a.gamma, &mut report, "calibration")?;
    report.emit(a.report.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn condense_config(opts: &CondenseOpts, seed: u64) -> CondenseConfig {
    CondenseConfig {
        m_per_class: opts.per_class,
        iters: opts.iters,
        step_size: opts.step,
        seed,
        feature_dim: opts.feature_dim,
        loss_tol: CondenseConfig::default().loss_tol,
        embedding: EmbeddingKind::RandomFeatures,
    }
}

fn condense_summary(out: &CondenseOutput, output: Option<&Path>, trace: Option<&Path>) -> serde_json::Value {
    let mut per_class: Vec<(String, usize)> = Vec::new();
    for l in &out.synth.labels {
        match per_class.last_mut() {
            Some((last, c)) if last == l => *c += 1,
            _ => per_class.push((l.clone(), 1)),
        }
    }
    serde_json::json!({
        "output": output,
        "loss_trace_path": trace,
        "rows": out.synth.m(),
        "per_class": per_class.iter().map(|(l, c)| serde_json::json!({"label": l, "rows": c})).collect::<Vec<_>>(),
        "iterations": out.iterations,
        "initial_loss": out.loss_trace[0],
        "final_loss": out.loss_trace[out.loss_trace.len() - 1],
        "oversampled": out.oversampled,
    })
}

fn write_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let json = serde_json::to_string(trace)
        .map_err(|e| Error::domain(format!("cannot serialise loss trace: {e}")))?;
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

fn cmd_condense(config: &RunConfig, a: &CondenseArgs, stdout: &mut dyn Write) -> Result<i32> {
    let data = load(&a.input, &a.bounds, Some(&a.label), a.clip)?;
    let opts = CondenseOpts {
        per_class: a.per_class,
        iters: a.iters,
        feature_dim: a.feature_dim,
        step: a.step,
    };
    let out = condense(&data, &condense_config(&opts, a.seed))?;
    out.synth.write_csv(&a.output)?;
    if let Some(p) = &a.loss_trace {
        write_trace(p, &out.loss_trace)?;
    }
    let mut report = RunReport::new(config.clone());
    if out.oversampled {
        report.add_flag("oversampled");
    }
    report.set_result(
        "condense",
        condense_summary(&out, Some(&a.output), a.loss_trace.as_deref()),
    )?;
    report.emit(a.report.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn audit_config(
    data: &Dataset,
    mechanism: Mechanism,
    column: Option<&str>,
    trials: usize,
    seed: u64,
    gamma: f64,
    delta: Option<f64>,
    slack: f64,
    grid: usize,
    condense: CondenseConfig,
) -> Result<AuditConfig> {
    let name = column.unwrap_or(data.column_names()[0]).to_string();
    let (_, col) = data
        .column(&name)
        .ok_or_else(|| Error::usage(format!("unknown column \"{name}\"")))?;
    let target_bounds = match col.bounds {
        Some(b) => b,
        None if crate::stats::summarize(&col.values)?.var == 0.0 => {
            return Err(Error::Degenerate { column: name });
        }
        None => return Err(Error::usage(format!("column \"{name}\" has no bounds"))),
    };
    let config = AuditConfig {
        mechanism,
        trials,
        seed,
        delta,
        gamma,
        column: name,
        target_bounds,
        threshold_grid: grid,
        slack,
        condense,
    };
    config.validate()?;
    Ok(config)
}

fn cmd_audit(config: &RunConfig, a: &AuditArgs, stdout: &mut dyn Write) -> Result<i32> {
    if a.mechanism == Mechanism::Condense && a.label.is_none() {
        return Err(Error::usage("--mechanism condense requires --label"));
    }
    if a.trials < crate::auditor::MIN_TRIALS {
        return Err(Error::usage(format!(
            "--trials must be >= {}",
            crate::auditor::MIN_TRIALS
        )));
    }
    let mut report = RunReport::new(config.clone());
    let mut data = load(&a.input, &a.bounds, a.label.as_deref(), a.clip)?;
    infer_bounds(&mut data, &mut report);
    let cfg = audit_config(
        &data,
        a.mechanism,
        a.column.as_deref(),
        a.trials,
        a.seed,
        a.gamma,
        a.delta,
        a.slack,
        a.grid,
        condense_config(&a.condense, a.seed),
    )?;
    let audit = run_audit(&data, &cfg)?;
    report.set_result("audit", &audit)?;
    report.emit(Some(&a.report), stdout)?;
    Ok(match audit.verdict {
        Verdict::Consistent => EXIT_OK,
        Verdict::ViolationSuspected => EXIT_VIOLATION,
    })
}

fn cmd_evaluate(config: &RunConfig, a: &EvaluateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let train_data = load(&a.train, &[], Some(&a.label), false)?;
    let test_data = load(&a.test, &[], Some(&a.label), false)?;
    let params = TrainParams {
        epochs: a.epochs,
        lr: a.lr,
        seed: a.seed,
    };
    let model = train(&train_data, &params)?;
    let result = evaluate(&model, &test_data)?;
    let mut report = RunReport::new(config.clone());
    report.set_result("evaluation", &result)?;
    report.emit(a.report.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

/// Seeded split: row `i` goes to the test side when its uniform draw from
/// slot `i` falls below `fraction`.
fn split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::usage("--test-fraction must lie in (0, 1)"));
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..data.n())
        .partition(|&i| slot_rng(seed, SPLIT_STREAM, i as u64).random::<f64>() < fraction);
    if test.is_empty() || train.is_empty() {
        return Err(Error::domain("split left an empty train or test set"));
    }
    Ok((data.select(&train)?, data.select(&test)?))
}

fn cmd_pipeline(config: &RunConfig, a: &PipelineArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut report = RunReport::new(config.clone());
    let outcome = pipeline_stages(a, &mut report);
    let code = match outcome {
        Ok(code) => code,
        Err((stage, err)) => {
            report.fail(Some(stage), &err);
            eprintln!("error in stage {stage}: {err}");
            err.exit_code()
        }
    };
    report.emit(Some(&a.report), stdout)?;
    Ok(code)
}

fn pipeline_stages(
    a: &PipelineArgs,
    report: &mut RunReport,
) -> std::result::Result<i32, (&'static str, Error)> {
    let at = |stage: &'static str| move |e: Error| (stage, e);

    let mut data = load(&a.input, &a.bounds, Some(&a.label), a.clip).map_err(at("ingest"))?;
    infer_bounds(&mut data, report);
    let (train_data, test_data) = match &a.test {
        Some(p) => {
            let mut test = load(p, &a.bounds, Some(&a.label), a.clip).map_err(at("ingest"))?;
            for (j, col) in data.columns().iter().enumerate() {
                if j < test.dim() {
                    test.set_bounds(j, col.bounds);
                }
            }
            (data, test)
        }
        None => split(&data, a.test_fraction, a.seed).map_err(at("ingest"))?,
    };

    let opts = CondenseOpts {
        per_class: a.per_class,
        iters: a.iters,
        feature_dim: a.feature_dim,
        step: a.step,
    };
    let ccfg = condense_config(&opts, a.seed);
    let out = condense(&train_data, &ccfg).map_err(at("condense"))?;
    if let Some(p) = &a.output {
        out.synth.write_csv(p).map_err(at("condense"))?;
    }
    if out.oversampled {
        report.add_flag("oversampled");
    }
    report
        .set_result("condense", condense_summary(&out, a.output.as_deref(), None))
        .map_err(at("condense"))?;

    calibrate_columns(&train_data, None, a.gamma, report, "calibration").map_err(at("calibrate"))?;

    let acfg = audit_config(
        &train_data,
        Mechanism::Condense,
        a.column.as_deref(),
        a.trials,
        a.seed,
        a.gamma,
        a.delta,
        a.slack,
        a.grid,
        ccfg,
    )
    .map_err(at("audit"))?;
    let audit = run_audit(&train_data, &acfg).map_err(at("audit"))?;
    report.set_result("audit", &audit).map_err(at("audit"))?;

    let params = TrainParams {
        epochs: a.epochs,
        lr: a.lr,
        seed: a.seed,
    };
    let utility =
        compare_utility(&train_data, &out.synth, &test_data, &params).map_err(at("evaluate"))?;
    report.set_result("utility", &utility).map_err(at("evaluate"))?;
    report.set_result("verdict", audit.verdict).map_err(at("audit"))?;

    Ok(match audit.verdict {
        Verdict::Consistent => EXIT_OK,
        Verdict::ViolationSuspected => EXIT_VIOLATION,
    })
}
