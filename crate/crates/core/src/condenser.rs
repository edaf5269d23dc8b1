//! Distribution-matching condensation.
//!
//! A frozen embedding maps every record to a feature vector. For each class
//! the loss is the squared distance between the mean embedded feature of the
//! synthetic rows and that of the real rows; the total loss sums classes in
//! ascending label order. Synthetic rows start at seeded real records of the
//! same class and move by full-batch gradient descent with step halving,
//! projected back into the column box after every update.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{keyed_rng, slot_rng, EMBEDDING_STREAM};
use crate::stats::{neumaier_sum, Bounds, ClassGroup, Column, Dataset, Labels};

/// Maximum number of step halvings tried before an iteration gives up.
pub const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    /// Gaussian random projection followed by `tanh`.
    RandomFeatures,
    /// `φ(x) = x`; the loss becomes plain class-mean matching.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondenseConfig {
    pub m_per_class: usize,
    pub iters: usize,
    pub step_size: f64,
    pub seed: u64,
    pub feature_dim: usize,
    pub loss_tol: f64,
    pub embedding: EmbeddingKind,
}

impl Default for CondenseConfig {
    fn default() -> Self {
        Self {
            m_per_class: 10,
            iters: 200,
            step_size: 1.0,
            seed: 0,
            feature_dim: 32,
            loss_tol: 1e-12,
            embedding: EmbeddingKind::RandomFeatures,
        }
    }
}

impl CondenseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(Error::usage("iters must be >= 1"));
        }
        if self.m_per_class == 0 {
            return Err(Error::usage("m_per_class must be >= 1"));
        }
        if self.feature_dim == 0 {
            return Err(Error::usage("feature_dim must be >= 1"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::usage("step size must be positive"));
        }
        if self.loss_tol.is_nan() || self.loss_tol < 0.0 {
            return Err(Error::usage("loss tolerance must be >= 0"));
        }
        Ok(())
    }
}

/// Frozen feature map. Never trained.
#[derive(Debug, Clone, PartialEq)]
pub enum Embedding {
    Identity {
        dim: usize,
    },
    RandomFeatures {
        dim: usize,
        width: usize,
        /// Row-major `width × dim`.
        weights: Vec<f64>,
        bias: Vec<f64>,
        /// Inputs are rescaled to roughly `[-1, 1]` by `(x - lower) * scale - 1`.
        lower: Vec<f64>,
        scale: Vec<f64>,
    },
}

impl Embedding {
    pub fn identity(dim: usize) -> Self {
        Embedding::Identity { dim }
    }

    /// Weights depend only on `(seed, width, ranges)`.
    pub fn random(seed: u64, width: usize, ranges: &[(f64, f64)]) -> Self {
        let dim = ranges.len();
        let mut rng = keyed_rng(seed, EMBEDDING_STREAM);
        let w_scale = (3.0 / dim as f64).sqrt();
        let weights = (0..width * dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                w_scale * z
            })
            .collect::<Vec<f64>>();
        let bias = (0..width)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                0.5 * z
            })
            .collect::<Vec<f64>>();
        let lower = ranges.iter().map(|r| r.0).collect();
        let scale = ranges
            .iter()
            .map(|&(lo, hi)| if hi > lo { 2.0 / (hi - lo) } else { 1.0 })
            .collect();
        Embedding::RandomFeatures {
            dim,
            width,
            weights,
            bias,
            lower,
            scale,
        }
    }

    pub fn for_data(config: &CondenseConfig, data: &Dataset) -> Self {
        match config.embedding {
            EmbeddingKind::Identity => Embedding::identity(data.dim()),
            EmbeddingKind::RandomFeatures => {
                let ranges: Vec<_> = data.columns().iter().map(Column::effective_range).collect();
                Embedding::random(config.seed, config.feature_dim, &ranges)
            }
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Embedding::Identity { dim } | Embedding::RandomFeatures { dim, .. } => *dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Embedding::Identity { dim } => *dim,
            Embedding::RandomFeatures { width, .. } => *width,
        }
    }

    pub fn embed(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Embedding::Identity { .. } => out.copy_from_slice(x),
            Embedding::RandomFeatures {
                dim,
                weights,
                bias,
                lower,
                scale,
                ..
            } => {
                for (k, o) in out.iter_mut().enumerate() {
                    let w = &weights[k * dim..(k + 1) * dim];
                    let mut u = bias[k];
                    for j in 0..*dim {
                        u += w[j] * ((x[j] - lower[j]) * scale[j] - 1.0);
                    }
                    *o = u.tanh();
                }
            }
        }
    }

    /// Accumulates `coef · J(x)ᵀ r` into `grad`.
    fn add_vjp(&self, x: &[f64], r: &[f64], coef: f64, scratch: &mut [f64], grad: &mut [f64]) {
        match self {
            Embedding::Identity { .. } => {
                for (g, ri) in grad.iter_mut().zip(r) {
                    *g += coef * ri;
                }
            }
            Embedding::RandomFeatures {
                dim,
                weights,
                scale,
                ..
            } => {
                self.embed(x, scratch);
                for (k, phi) in scratch.iter().enumerate() {
                    let a = coef * (1.0 - phi * phi) * r[k];
                    let w = &weights[k * dim..(k + 1) * dim];
                    for j in 0..*dim {
                        grad[j] += a * w[j] * scale[j];
                    }
                }
            }
        }
    }
}

/// The condensed set: `m` labelled rows with the source schema.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSet {
    pub columns: Vec<String>,
    pub bounds: Vec<Option<Bounds>>,
    pub label_name: String,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl SyntheticSet {
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dataset(&self) -> Result<Dataset> {
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, name)| {
                Column::new(
                    name.clone(),
                    self.rows.iter().map(|r| r[j]).collect(),
                    self.bounds[j],
                )
            })
            .collect();
        Dataset::new(
            columns,
            Some(Labels {
                name: self.label_name.clone(),
                values: self.labels.clone(),
            }),
        )
    }

    /// Feature columns in source order followed by the label column. Values use
    /// the shortest representation that round-trips exactly.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |e: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header = self.columns.clone();
        header.push(self.label_name.clone());
        w.write_record(&header).map_err(csv_err)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(label.clone());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchLoss {
    pub value: f64,
}

/// Per-class embedded means of the real data plus the synthetic layout.
struct Problem<'a> {
    embedding: &'a Embedding,
    targets: Vec<Vec<f64>>,
    /// Synthetic row ranges per class, aligned with `targets`.
    slots: Vec<std::ops::Range<usize>>,
    dim: usize,
}

fn class_mean_embedding(embedding: &Embedding, group: &ClassGroup) -> Vec<f64> {
    let f = embedding.output_dim();
    let mut feats = vec![vec![0.0; f]; group.rows.len()];
    for (row, out) in group.rows.iter().zip(feats.iter_mut()) {
        embedding.embed(row, out);
    }
    let n = group.rows.len() as f64;
    (0..f)
        .map(|k| neumaier_sum(feats.iter().map(|v| v[k])) / n)
        .collect()
}

impl Problem<'_> {
    fn residuals(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let f = self.embedding.output_dim();
        let mut scratch = vec![0.0; f];
        self.targets
            .iter()
            .zip(&self.slots)
            .map(|(target, range)| {
                let m = range.len() as f64;
                let mut mean = vec![0.0; f];
                for row in &rows[range.clone()] {
                    self.embedding.embed(row, &mut scratch);
                    for (a, s) in mean.iter_mut().zip(&scratch) {
                        *a += s;
                    }
                }
                mean.iter().zip(target).map(|(a, t)| a / m - t).collect()
            })
            .collect()
    }

    fn loss(&self, rows: &[Vec<f64>]) -> f64 {
        self.residuals(rows)
            .iter()
            .map(|r| r.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    fn gradient(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let residuals = self.residuals(rows);
        let mut scratch = vec![0.0; self.embedding.output_dim()];
        let mut grad = vec![vec![0.0; self.dim]; rows.len()];
        for (r, range) in residuals.iter().zip(&self.slots) {
            let coef = 2.0 / range.len() as f64;
            for i in range.clone() {
                self.embedding
                    .add_vjp(&rows[i], r, coef, &mut scratch, &mut grad[i]);
            }
        }
        grad
    }
}

fn check_schema(data: &Dataset, synth: &SyntheticSet, embedding: &Embedding) -> Result<()> {
    if data.column_names() != synth.columns.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::usage("synthetic set columns do not match the dataset"));
    }
    if embedding.input_dim() != data.dim() {
        return Err(Error::usage(format!(
            "embedding expects {} inputs, dataset has {} columns",
            embedding.input_dim(),
            data.dim()
        )));
    }
    if synth.rows.iter().any(|r| r.len() != data.dim()) || synth.rows.len() != synth.labels.len() {
        return Err(Error::usage("malformed synthetic set"));
    }
    Ok(())
}

/// Sum over classes of ‖mean φ(S_c) − mean φ(T_c)‖².
pub fn match_loss(data: &Dataset, synth: &SyntheticSet, embedding: &Embedding) -> Result<MatchLoss> {
    check_schema(data, synth, embedding)?;
    let groups = data.class_groups()?;
    let mut rows = Vec::with_capacity(synth.m());
    let mut targets = Vec::with_capacity(groups.len());
    let mut slots = Vec::with_capacity(groups.len());
    for g in &groups {
        let start = rows.len();
        rows.extend(
            synth
                .rows
                .iter()
                .zip(&synth.labels)
                .filter(|(_, l)| **l == g.label)
                .map(|(r, _)| r.clone()),
        );
        if rows.len() == start {
            return Err(Error::usage(format!(
                "synthetic set has no rows for class \"{}\"",
                g.label
            )));
        }
        targets.push(class_mean_embedding(embedding, g));
        slots.push(start..rows.len());
    }
    if let Some(l) = synth.labels.iter().find(|l| !groups.iter().any(|g| &g.label == *l)) {
        return Err(Error::usage(format!("synthetic class \"{l}\" absent from data")));
    }
    let problem = Problem {
        embedding,
        targets,
        slots,
        dim: data.dim(),
    };
    Ok(MatchLoss {
        value: problem.loss(&rows),
    })
}

/// Analytic gradient of [`match_loss`] with respect to every synthetic value,
/// rows in the order of `synth.rows`.
pub fn match_loss_gradient(
    data: &Dataset,
    synth: &SyntheticSet,
    embedding: &Embedding,
) -> Result<Vec<Vec<f64>>> {
    check_schema(data, synth, embedding)?;
    let groups = data.class_groups()?;
    let mut order = Vec::with_capacity(synth.m());
    let mut targets = Vec::new();
    let mut slots = Vec::new();
    for g in &groups {
        let start = order.len();
        order.extend((0..synth.m()).filter(|&i| synth.labels[i] == g.label));
        targets.push(class_mean_embedding(embedding, g));
        slots.push(start..order.len());
    }
    if order.len() != synth.m() || slots.iter().any(|s| s.is_empty()) {
        return Err(Error::usage("synthetic labels do not match dataset classes"));
    }
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| synth.rows[i].clone()).collect();
    let problem = Problem {
        embedding,
        targets,
        slots,
        dim: data.dim(),
    };
    let grad = problem.gradient(&rows);
    let mut out = vec![Vec::new(); synth.m()];
    for (g, &i) in grad.into_iter().zip(&order) {
        out[i] = g;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondenseOutput {
    pub synth: SyntheticSet,
    /// Initial loss followed by the loss after every accepted step.
    pub loss_trace: Vec<f64>,
    pub iterations: usize,
    /// Some class has fewer records than `m_per_class`.
    pub oversampled: bool,
}

pub fn condense(data: &Dataset, config: &CondenseConfig) -> Result<CondenseOutput> {
    config.validate()?;
    let labels = data
        .labels()
        .ok_or_else(|| Error::usage("condensation requires a label column"))?;
    let groups = data.class_groups()?;
    if let Some(g) = groups.iter().find(|g| g.rows.is_empty()) {
        return Err(Error::domain(format!("class \"{}\" has no records", g.label)));
    }
    let embedding = Embedding::for_data(config, data);
    let ranges: Vec<(f64, f64)> = data.columns().iter().map(Column::effective_range).collect();
    let m = config.m_per_class;

    let mut rows = Vec::with_capacity(groups.len() * m);
    let mut synth_labels = Vec::with_capacity(groups.len() * m);
    let mut slots = Vec::with_capacity(groups.len());
    for (c, g) in groups.iter().enumerate() {
        let start = rows.len();
        for slot in 0..m {
            let idx = slot_rng(config.seed, c as u64, slot as u64).random_range(0..g.rows.len());
            rows.push(g.rows[idx].clone());
            synth_labels.push(g.label.clone());
        }
        slots.push(start..rows.len());
    }
    let oversampled = groups.iter().any(|g| g.rows.len() < m);
    let problem = Problem {
        embedding: &embedding,
        targets: groups
            .iter()
            .map(|g| class_mean_embedding(&embedding, g))
            .collect(),
        slots,
        dim: data.dim(),
    };

    let project = |rows: &mut [Vec<f64>]| {
        for row in rows.iter_mut() {
            for (v, &(lo, hi)) in row.iter_mut().zip(&ranges) {
                *v = v.clamp(lo, hi);
            }
        }
    };
    project(&mut rows);

    let mut loss = problem.loss(&rows);
    let mut trace = vec![loss];
    let mut iterations = 0;
    while iterations < config.iters && loss > 0.0 {
        let grad = problem.gradient(&rows);
        let mut step = config.step_size;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut cand: Vec<Vec<f64>> = rows
                .iter()
                .zip(&grad)
                .map(|(r, g)| r.iter().zip(g).map(|(x, d)| x - step * d).collect())
                .collect();
            project(&mut cand);
            let cand_loss = problem.loss(&cand);
            if cand_loss < loss {
                accepted = Some((cand, cand_loss));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cand_loss)) = accepted else {
            break;
        };
        let improvement = loss - cand_loss;
        rows = cand;
        loss = cand_loss;
        trace.push(loss);
        iterations += 1;
        if improvement < config.loss_tol {
            break;
        }
    }

    Ok(CondenseOutput {
        synth: SyntheticSet {
            columns: data.column_names().iter().map(|s| s.to_string()).collect(),
            bounds: data.columns().iter().map(|c| c.bounds).collect(),
            label_name: labels.name.clone(),
            rows,
            labels: synth_labels,
        },
        loss_trace: trace,
        iterations,
        oversampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled(rows: &[(Vec<f64>, &str)], bounds: Option<(f64, f64)>) -> Dataset {
        let dim = rows[0].0.len();
        let b = bounds.map(|(a, b)| Bounds::new(a, b).unwrap());
        let cols = (0..dim)
            .map(|j| Column::new(format!("x{j}"), rows.iter().map(|r| r.0[j]).collect(), b))
            .collect();
        let labels = Labels {
            name: "y".into(),
            values: rows.iter().map(|r| r.1.to_string()).collect(),
        };
        Dataset::new(cols, Some(labels)).unwrap()
    }

    fn identity_cfg(m: usize) -> CondenseConfig {
        CondenseConfig {
            m_per_class: m,
            embedding: EmbeddingKind::Identity,
            ..Default::default()
        }
    }

    #[test]
    fn constant_data_is_a_fixed_point() {
        let rows: Vec<_> = (0..100).map(|_| (vec![0.5, 0.5], "a")).collect();
        let d = labelled(&rows, Some((0.0, 1.0)));
        let out = condense(&d, &CondenseConfig { m_per_class: 1, ..Default::default() }).unwrap();
        for v in &out.synth.rows[0] {
            assert!((v - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn identity_recovers_class_mean() {
        let pts = [(0.0, -3.0), (2.0, -1.0), (1.5, -2.5), (0.5, -1.5)];
        let rows: Vec<_> = pts.iter().map(|&(a, b)| (vec![a, b], "a")).collect();
        let d = labelled(&rows, Some((-10.0, 10.0)));
        let out = condense(&d, &identity_cfg(1)).unwrap();
        let r = &out.synth.rows[0];
        assert!((r[0] - 1.0).abs() < 1e-6 && (r[1] + 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn displaced_point_loss_is_squared_distance() {
        let rows = vec![(vec![1.0, 2.0], "a"), (vec![3.0, 4.0], "a")];
        let d = labelled(&rows, None);
        let synth = SyntheticSet {
            columns: vec!["x0".into(), "x1".into()],
            bounds: vec![None, None],
            label_name: "y".into(),
            rows: vec![vec![2.0 + 0.3, 3.0 - 0.4]],
            labels: vec!["a".into()],
        };
        let loss = match_loss(&d, &synth, &Embedding::identity(2)).unwrap();
        assert!((loss.value - 0.25).abs() < 1e-15);

        let at_mean = SyntheticSet {
            rows: vec![vec![2.0, 3.0]],
            ..synth.clone()
        };
        assert_eq!(match_loss(&d, &at_mean, &Embedding::identity(2)).unwrap().value, 0.0);
    }

    #[test]
    fn match_loss_rejects_schema_mismatch() {
        let d = labelled(&[(vec![1.0, 2.0], "a")], None);
        let synth = SyntheticSet {
            columns: vec!["x0".into(), "other".into()],
            bounds: vec![None, None],
            label_name: "y".into(),
            rows: vec![vec![1.0, 2.0]],
            labels: vec!["a".into()],
        };
        assert!(matches!(
            match_loss(&d, &synth, &Embedding::identity(2)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn unlabelled_data_is_rejected() {
        let d = Dataset::new(vec![Column::new("x", vec![1.0, 2.0], None)], None).unwrap();
        assert!(matches!(
            condense(&d, &CondenseConfig::default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let d = labelled(&[(vec![1.0], "a")], None);
        for cfg in [
            CondenseConfig { iters: 0, ..Default::default() },
            CondenseConfig { m_per_class: 0, ..Default::default() },
            CondenseConfig { feature_dim: 0, ..Default::default() },
        ] {
            assert!(condense(&d, &cfg).is_err());
        }
    }

    #[test]
    fn oversampling_is_flagged_and_counts_exact() {
        let rows = vec![
            (vec![0.1], "a"),
            (vec![0.2], "a"),
            (vec![0.9], "b"),
            (vec![0.8], "b"),
            (vec![0.7], "b"),
        ];
        let d = labelled(&rows, Some((0.0, 1.0)));
        let out = condense(&d, &CondenseConfig { m_per_class: 3, ..Default::default() }).unwrap();
        assert!(out.oversampled);
        assert_eq!(out.synth.labels.iter().filter(|l| *l == "a").count(), 3);
        assert_eq!(out.synth.labels.iter().filter(|l| *l == "b").count(), 3);
        for w in out.loss_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for r in &out.synth.rows {
            assert!((0.0..=1.0).contains(&r[0]));
        }
    }

    #[test]
    fn embedding_is_deterministic() {
        let a = Embedding::random(3, 8, &[(0.0, 1.0), (-1.0, 1.0)]);
        let b = Embedding::random(3, 8, &[(0.0, 1.0), (-1.0, 1.0)]);
        assert_eq!(a, b);
        let mut x = vec![0.0; 8];
        let mut y = vec![0.0; 8];
        a.embed(&[0.3, 0.2], &mut x);
        b.embed(&[0.3, 0.2], &mut y);
        assert_eq!(x, y);
        assert!(x.iter().all(|v| v.abs() < 1.0));
    }
}
