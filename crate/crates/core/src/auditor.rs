//! Membership-inference audit over replacement neighbours.
//!
//! Each trial rebuilds the dataset around a fixed target record: compromised
//! records keep their observed values, every other non-target record is drawn
//! from the empirical distribution of the input, and a fair coin decides
//! whether the target sits at the lower (`D`) or upper (`D′`) bound. The
//! attacker sees the mechanism output, reduces it to a scalar statistic and
//! guesses `D′` when the statistic exceeds a threshold. Error rates over all
//! trials, swept over a threshold grid, give the empirical ε.
//!
//! Trial `t` draws only from the ChaCha stream `(seed, t)` and outcomes are
//! kept in trial order, so reports do not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrator::{
    calibrate_column, compromised_count, epsilon_from_rates, ConfusionRates, EpsilonStatus,
    PrivacyParams, Provenance,
};
use crate::condenser::{condense, CondenseConfig};
use crate::error::{Error, Result};
use crate::rng::keyed_rng;
use crate::stats::{Bounds, Dataset};

pub const MIN_TRIALS: usize = 100;
pub const MIN_THRESHOLD_GRID: usize = 3;
pub const DEFAULT_THRESHOLD_GRID: usize = 101;
pub const DEFAULT_SLACK: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// Release the column sum.
    Sum,
    /// Release a condensed synthetic set.
    Condense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub mechanism: Mechanism,
    pub trials: usize,
    pub seed: u64,
    /// Overrides the δ of the matching closed form.
    pub delta: Option<f64>,
    pub gamma: f64,
    /// Audited column.
    pub column: String,
    pub target_bounds: Bounds,
    pub threshold_grid: usize,
    pub slack: f64,
    /// Used when `mechanism` is `Condense`.
    pub condense: CondenseConfig,
}

impl AuditConfig {
    pub fn new(mechanism: Mechanism, column: impl Into<String>, target_bounds: Bounds) -> Self {
        Self {
            mechanism,
            trials: 20_000,
            seed: 0,
            delta: None,
            gamma: 0.0,
            column: column.into(),
            target_bounds,
            threshold_grid: DEFAULT_THRESHOLD_GRID,
            slack: DEFAULT_SLACK,
            condense: CondenseConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::usage(format!(
                "trials must be >= {MIN_TRIALS}, got {}",
                self.trials
            )));
        }
        if self.threshold_grid < MIN_THRESHOLD_GRID {
            return Err(Error::usage(format!(
                "threshold grid must have >= {MIN_THRESHOLD_GRID} points"
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::usage(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if let Some(d) = self.delta {
            if !(0.0..1.0).contains(&d) {
                return Err(Error::usage(format!("delta must lie in [0, 1), got {d}")));
            }
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return Err(Error::usage("slack must be a finite value >= 0"));
        }
        if self.mechanism == Mechanism::Condense {
            self.condense.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditFlag {
    Clamped,
    Unbounded,
    VacuousDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    ViolationSuspected,
}

/// Worst-case ε over the threshold grid, with the rates that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEstimate {
    pub epsilon: f64,
    pub delta: f64,
    /// Floored at `1 / trials`.
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub best_threshold: f64,
    pub flags: Vec<AuditFlag>,
}

impl EmpiricalEstimate {
    pub fn has(&self, flag: AuditFlag) -> bool {
        self.flags.contains(&flag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub mechanism: Mechanism,
    pub column: String,
    pub trials: usize,
    pub trials_lower: usize,
    pub trials_upper: usize,
    pub gamma: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub epsilon_empirical: f64,
    pub epsilon_theoretical: f64,
    pub delta_used: f64,
    pub delta_theoretical: f64,
    pub theoretical_provenance: Provenance,
    pub best_threshold: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub flags: Vec<AuditFlag>,
}

/// `D` has the target cell at the lower bound, `D′` at the upper bound; all
/// other cells are shared.
pub fn make_neighbors(data: &Dataset, column: &str, target: Bounds) -> Result<(Dataset, Dataset)> {
    let (c, _) = data
        .column(column)
        .ok_or_else(|| Error::usage(format!("unknown column \"{column}\"")))?;
    let mut lower = data.clone();
    let mut upper = data.clone();
    lower.set_value(c, 0, target.lower);
    upper.set_value(c, 0, target.upper);
    Ok((lower, upper))
}

/// One simulated release.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// The target was at the upper bound (`D′`).
    pub upper: bool,
    pub statistic: f64,
}

/// Simulates every trial. The statistic grows with evidence for `D′`.
pub fn run_trials(data: &Dataset, config: &AuditConfig) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    let (c, _) = data
        .column(&config.column)
        .ok_or_else(|| Error::usage(format!("unknown column \"{}\"", config.column)))?;
    let n = data.n();
    let k = compromised_count(n, config.gamma).min(n.saturating_sub(1));
    let resampled = n - 1 - k;
    let target = config.target_bounds;

    let outcomes: Vec<Result<TrialOutcome>> = match config.mechanism {
        Mechanism::Sum => {
            let pool = &data.columns()[c].values;
            let known: f64 = pool[1..=k].iter().sum();
            (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = keyed_rng(config.seed, t as u64);
                    let upper = rng.random::<bool>();
                    let mut sum = if upper { target.upper } else { target.lower } + known;
                    for _ in 0..resampled {
                        sum += pool[rng.random_range(0..n)];
                    }
                    Ok(TrialOutcome {
                        upper,
                        statistic: sum - known,
                    })
                })
                .collect()
        }
        Mechanism::Condense => {
            if data.labels().is_none() {
                return Err(Error::usage("auditing the condenser requires a label column"));
            }
            let mut probe = data.row(0);
            probe[c] = target.upper;
            (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = keyed_rng(config.seed, t as u64);
                    let upper = rng.random::<bool>();
                    let mut order: Vec<usize> = (0..=k).collect();
                    order.extend((0..resampled).map(|_| rng.random_range(0..n)));
                    let mut trial = data.select(&order)?;
                    trial.set_value(c, 0, if upper { target.upper } else { target.lower });
                    // Fresh internal randomness per release.
                    let cfg = CondenseConfig {
                        seed: rng.random(),
                        ..config.condense.clone()
                    };
                    let out = condense(&trial, &cfg)?;
                    let nearest = out
                        .synth
                        .rows
                        .iter()
                        .map(|r| {
                            r.iter()
                                .zip(&probe)
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .fold(f64::INFINITY, f64::min);
                    Ok(TrialOutcome {
                        upper,
                        statistic: -nearest,
                    })
                })
                .collect()
        }
    };
    outcomes.into_iter().collect()
}

/// Sweeps `grid` evenly spaced thresholds over the observed statistic range
/// and keeps the largest ε; ties go to the smaller threshold.
pub fn estimate_epsilon(outcomes: &[TrialOutcome], delta: f64, grid: usize) -> Result<EmpiricalEstimate> {
    if grid < MIN_THRESHOLD_GRID {
        return Err(Error::usage(format!(
            "threshold grid must have >= {MIN_THRESHOLD_GRID} points"
        )));
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::usage(format!("delta must be >= 0, got {delta}")));
    }
    let trials = outcomes.len();
    let n_upper = outcomes.iter().filter(|o| o.upper).count();
    let n_lower = trials - n_upper;
    if n_upper == 0 || n_lower == 0 {
        return Err(Error::domain("trials did not exercise both neighbouring datasets"));
    }
    let floor = 1.0 / trials as f64;
    let (lo, hi) = crate::stats::observed_range(
        &outcomes.iter().map(|o| o.statistic).collect::<Vec<_>>(),
    );

    let mut best: Option<(f64, EmpiricalEstimate)> = None;
    for g in 0..grid {
        let t = lo + (hi - lo) * g as f64 / (grid - 1) as f64;
        let fp = outcomes.iter().filter(|o| !o.upper && o.statistic > t).count();
        let fn_ = outcomes.iter().filter(|o| o.upper && o.statistic <= t).count();
        let fp_raw = fp as f64 / n_lower as f64;
        let fn_raw = fn_ as f64 / n_upper as f64;
        let fp_rate = fp_raw.max(floor);
        let fn_rate = fn_raw.max(floor);

        let (epsilon, flags) = if delta >= 1.0 {
            (0.0, vec![AuditFlag::Clamped, AuditFlag::VacuousDelta])
        } else {
            let est = epsilon_from_rates(&ConfusionRates::new(fp_rate, fn_rate, delta)?);
            let raw = epsilon_from_rates(&ConfusionRates::new(fp_raw, fn_raw, delta)?);
            let mut flags = Vec::new();
            if est.status == EpsilonStatus::Clamped {
                flags.push(AuditFlag::Clamped);
            }
            if raw.status == EpsilonStatus::Unbounded {
                flags.push(AuditFlag::Unbounded);
            }
            (est.epsilon, flags)
        };
        if best.as_ref().is_none_or(|(e, _)| epsilon > *e) {
            best = Some((
                epsilon,
                EmpiricalEstimate {
                    epsilon,
                    delta,
                    fp_rate,
                    fn_rate,
                    best_threshold: t,
                    flags,
                },
            ));
        }
    }
    Ok(best.expect("grid is non-empty").1)
}

/// Consistent iff the empirical ε stays within `slack` of the theoretical one
/// and the attack was not perfect. Both must be read at the same δ.
pub fn reconcile(empirical: &EmpiricalEstimate, theoretical: &PrivacyParams, slack: f64) -> Result<Verdict> {
    if empirical.delta.to_bits() != theoretical.delta.to_bits() {
        return Err(Error::usage(format!(
            "cannot reconcile epsilons read at different deltas ({} vs {})",
            empirical.delta, theoretical.delta
        )));
    }
    if empirical.has(AuditFlag::Unbounded) || empirical.epsilon > theoretical.epsilon + slack {
        Ok(Verdict::ViolationSuspected)
    } else {
        Ok(Verdict::Consistent)
    }
}

/// Closed-form parameters for the audited column under the configured threat
/// model, with the audit's target bounds as the record bounds.
pub fn theoretical_params(data: &Dataset, config: &AuditConfig) -> Result<PrivacyParams> {
    let (_, col) = data
        .column(&config.column)
        .ok_or_else(|| Error::usage(format!("unknown column \"{}\"", config.column)))?;
    calibrate_column(&col.values, Some(config.target_bounds), config.gamma)
        .map(|c| c.params)
        .map_err(|e| e.in_column(&col.name))
}

/// Trials plus threshold sweep, without any closed-form comparison.
pub fn empirical_epsilon(data: &Dataset, config: &AuditConfig, delta: f64) -> Result<EmpiricalEstimate> {
    let outcomes = run_trials(data, config)?;
    estimate_epsilon(&outcomes, delta, config.threshold_grid)
}

pub fn run_audit(data: &Dataset, config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let theory = theoretical_params(data, config)?;
    let delta_used = config.delta.unwrap_or(theory.delta);
    let outcomes = run_trials(data, config)?;
    let mut estimate = estimate_epsilon(&outcomes, delta_used, config.threshold_grid)?;
    if delta_used >= 1.0 && !estimate.has(AuditFlag::VacuousDelta) {
        estimate.flags.push(AuditFlag::VacuousDelta);
    }
    estimate.flags.sort();
    estimate.flags.dedup();
    let at_used = PrivacyParams {
        delta: delta_used,
        ..theory
    };
    let verdict = reconcile(&estimate, &at_used, config.slack)?;
    let trials_upper = outcomes.iter().filter(|o| o.upper).count();
    Ok(AuditReport {
        mechanism: config.mechanism,
        column: config.column.clone(),
        trials: outcomes.len(),
        trials_lower: outcomes.len() - trials_upper,
        trials_upper,
        gamma: config.gamma,
        fp_rate: estimate.fp_rate,
        fn_rate: estimate.fn_rate,
        epsilon_empirical: estimate.epsilon,
        epsilon_theoretical: theory.epsilon,
        delta_used,
        delta_theoretical: theory.delta,
        theoretical_provenance: theory.provenance,
        best_threshold: estimate.best_threshold,
        slack: config.slack,
        verdict,
        flags: estimate.flags,
    })
}
