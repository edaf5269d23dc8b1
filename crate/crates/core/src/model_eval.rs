//! Multinomial logistic regression used to measure the utility of a condensed
//! set against the full data.

use std::borrow::Cow;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::condenser::{SyntheticSet, MAX_HALVINGS};
use crate::error::{Error, Result};
use crate::rng::{keyed_rng, MODEL_INIT_STREAM};
use crate::stats::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainedOn {
    Original,
    Synthetic,
}

/// Anything a model can be fitted to.
pub trait TrainingSource {
    fn training_data(&self) -> Result<Cow<'_, Dataset>>;
    fn tag(&self) -> TrainedOn;
}

impl TrainingSource for Dataset {
    fn training_data(&self) -> Result<Cow<'_, Dataset>> {
        Ok(Cow::Borrowed(self))
    }
    fn tag(&self) -> TrainedOn {
        TrainedOn::Original
    }
}

impl TrainingSource for SyntheticSet {
    fn training_data(&self) -> Result<Cow<'_, Dataset>> {
        self.to_dataset().map(Cow::Owned)
    }
    fn tag(&self) -> TrainedOn {
        TrainedOn::Synthetic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainParams {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 1.0,
            seed: 0,
        }
    }
}

/// Softmax-linear classifier over standardised features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub columns: Vec<String>,
    /// Ascending label order; prediction ties go to the earlier class.
    pub classes: Vec<String>,
    /// One weight vector per class, over standardised features.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    pub trained_on: TrainedOn,
}

impl LinearModel {
    fn logits(&self, x: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let w = &self.weights[c];
            let mut z = self.bias[c];
            for j in 0..x.len() {
                z += w[j] * (x[j] - self.feature_mean[j]) / self.feature_scale[j];
            }
            *o = z;
        }
    }

    pub fn predict_index(&self, x: &[f64]) -> usize {
        let mut z = vec![0.0; self.classes.len()];
        self.logits(x, &mut z);
        let mut best = 0;
        for c in 1..z.len() {
            if z[c] > z[best] {
                best = c;
            }
        }
        best
    }

    pub fn predict(&self, x: &[f64]) -> &str {
        &self.classes[self.predict_index(x)]
    }
}

struct Design {
    rows: Vec<Vec<f64>>,
    targets: Vec<usize>,
    k: usize,
}

impl Design {
    /// Mean cross-entropy.
    fn loss(&self, w: &[Vec<f64>], b: &[f64]) -> f64 {
        let mut z = vec![0.0; self.k];
        let total: f64 = self
            .rows
            .iter()
            .zip(&self.targets)
            .map(|(x, &y)| {
                logits(w, b, x, &mut z);
                log_sum_exp(&z) - z[y]
            })
            .sum();
        total / self.rows.len() as f64
    }

    fn gradient(&self, w: &[Vec<f64>], b: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let d = w[0].len();
        let mut gw = vec![vec![0.0; d]; self.k];
        let mut gb = vec![0.0; self.k];
        let mut z = vec![0.0; self.k];
        for (x, &y) in self.rows.iter().zip(&self.targets) {
            logits(w, b, x, &mut z);
            let lse = log_sum_exp(&z);
            for c in 0..self.k {
                let p = (z[c] - lse).exp() - if c == y { 1.0 } else { 0.0 };
                gb[c] += p;
                for j in 0..d {
                    gw[c][j] += p * x[j];
                }
            }
        }
        let n = self.rows.len() as f64;
        gw.iter_mut().flatten().for_each(|g| *g /= n);
        gb.iter_mut().for_each(|g| *g /= n);
        (gw, gb)
    }
}

fn logits(w: &[Vec<f64>], b: &[f64], x: &[f64], out: &mut [f64]) {
    for (c, o) in out.iter_mut().enumerate() {
        *o = b[c] + w[c].iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn train(source: &impl TrainingSource, params: &TrainParams) -> Result<LinearModel> {
    train_with_trace(source, params).map(|(m, _)| m)
}

/// Full-batch gradient descent on the mean cross-entropy. Each epoch starts
/// from `lr` and halves until the loss does not increase; the returned trace
/// holds the initial loss and the loss after each accepted epoch.
pub fn train_with_trace(
    source: &impl TrainingSource,
    params: &TrainParams,
) -> Result<(LinearModel, Vec<f64>)> {
    if params.epochs == 0 {
        return Err(Error::usage("epochs must be >= 1"));
    }
    if !(params.lr.is_finite() && params.lr > 0.0) {
        return Err(Error::usage("learning rate must be positive"));
    }
    let data = source.training_data()?;
    let labels = data
        .labels()
        .ok_or_else(|| Error::usage("training requires a label column"))?;
    let mut classes: Vec<String> = labels.values.clone();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::domain("training requires at least two classes"));
    }

    let n = data.n();
    let dim = data.dim();
    let mut feature_mean = Vec::with_capacity(dim);
    let mut feature_scale = Vec::with_capacity(dim);
    for col in data.columns() {
        let s = crate::stats::summarize(&col.values)?;
        feature_mean.push(s.mean);
        feature_scale.push(if s.var > 0.0 { s.var.sqrt() } else { 1.0 });
    }
    let design = Design {
        rows: (0..n)
            .map(|i| {
                data.row(i)
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (v - feature_mean[j]) / feature_scale[j])
                    .collect()
            })
            .collect(),
        targets: labels
            .values
            .iter()
            .map(|l| classes.binary_search(l).expect("label present"))
            .collect(),
        k: classes.len(),
    };

    let mut rng = keyed_rng(params.seed, MODEL_INIT_STREAM);
    let init = Normal::new(0.0, 0.01).expect("valid normal");
    let mut w: Vec<Vec<f64>> = (0..classes.len())
        .map(|_| (0..dim).map(|_| init.sample(&mut rng)).collect())
        .collect();
    let mut b = vec![0.0; classes.len()];

    let mut loss = design.loss(&w, &b);
    let mut trace = vec![loss];
    for _ in 0..params.epochs {
        let (gw, gb) = design.gradient(&w, &b);
        let mut step = params.lr;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let cw: Vec<Vec<f64>> = w
                .iter()
                .zip(&gw)
                .map(|(wc, gc)| wc.iter().zip(gc).map(|(a, g)| a - step * g).collect())
                .collect();
            let cb: Vec<f64> = b.iter().zip(&gb).map(|(a, g)| a - step * g).collect();
            let cl = design.loss(&cw, &cb);
            if cl <= loss {
                w = cw;
                b = cb;
                loss = cl;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(loss);
    }

    Ok((
        LinearModel {
            columns: data.column_names().iter().map(|s| s.to_string()).collect(),
            classes,
            weights: w,
            bias: b,
            feature_mean,
            feature_scale,
            trained_on: source.tag(),
        },
        trace,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub n: usize,
    pub accuracy: f64,
    /// Union of model and test classes, ascending.
    pub classes: Vec<String>,
    /// `confusion[actual][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    /// Lexicographically larger label of a two-class task.
    pub positive_class: Option<String>,
    pub fp_rate: Option<f64>,
    pub fn_rate: Option<f64>,
}

pub fn evaluate(model: &LinearModel, test: &Dataset) -> Result<EvalResult> {
    if test.column_names() != model.columns.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::usage(format!(
            "test columns {:?} do not match model columns {:?}",
            test.column_names(),
            model.columns
        )));
    }
    let labels = test
        .labels()
        .ok_or_else(|| Error::usage("evaluation requires a label column"))?;
    let mut classes: Vec<String> = model
        .classes
        .iter()
        .chain(&labels.values)
        .cloned()
        .collect();
    classes.sort();
    classes.dedup();
    let idx = |l: &str| classes.binary_search_by(|c| c.as_str().cmp(l)).expect("class present");

    let k = classes.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for (i, label) in labels.values.iter().enumerate() {
        let predicted = model.predict(&test.row(i));
        confusion[idx(label)][idx(predicted)] += 1;
    }
    let n = test.n();
    let correct: u64 = (0..k).map(|c| confusion[c][c]).sum();
    let errors = n as u64 - correct;
    let accuracy = 1.0 - errors as f64 / n as f64;

    let (positive_class, fp_rate, fn_rate) = if k == 2 {
        let negatives = confusion[0][0] + confusion[0][1];
        let positives = confusion[1][0] + confusion[1][1];
        let rate = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        (
            Some(classes[1].clone()),
            Some(rate(confusion[0][1], negatives)),
            Some(rate(confusion[1][0], positives)),
        )
    } else {
        (None, None, None)
    };

    Ok(EvalResult {
        n,
        accuracy,
        classes,
        confusion,
        positive_class,
        fp_rate,
        fn_rate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityComparison {
    pub original: EvalResult,
    pub synthetic: EvalResult,
    /// Accuracy of the full-data model minus that of the synthetic-data model.
    pub gap: f64,
}

pub fn compare_utility(
    original: &Dataset,
    synth: &SyntheticSet,
    test: &Dataset,
    params: &TrainParams,
) -> Result<UtilityComparison> {
    let orig = evaluate(&train(original, params)?, test)?;
    let syn = evaluate(&train(synth, params)?, test)?;
    let gap = orig.accuracy - syn.accuracy;
    Ok(UtilityComparison {
        original: orig,
        synthetic: syn,
        gap,
    })
}

pub fn utility_gap(
    original: &Dataset,
    synth: &SyntheticSet,
    test: &Dataset,
    params: &TrainParams,
) -> Result<f64> {
    compare_utility(original, synth, test, params).map(|u| u.gap)
}
