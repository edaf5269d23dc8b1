//! Tabular data model, CSV ingestion, sensitivity and plugin moment estimators.
//!
//! Moments use the population convention (divide by `n`) and are accumulated
//! over the ascending-sorted values with compensated summation, so the result
//! does not depend on the order records arrive in.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared record bounds `[lower, upper]` for one column, with `lower < upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::domain(format!(
                "bounds must be finite, got ({lower}, {upper})"
            )));
        }
        if lower >= upper {
            return Err(Error::domain(format!(
                "bounds require lower < upper, got ({lower}, {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn clip(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }
}

/// Sensitivity of the bounded sum under replacement neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub delta_f: f64,
}

impl Sensitivity {
    pub fn new(delta_f: f64) -> Result<Self> {
        if !(delta_f.is_finite() && delta_f > 0.0) {
            return Err(Error::domain(format!(
                "sensitivity must be finite and positive, got {delta_f}"
            )));
        }
        Ok(Self { delta_f })
    }
}

/// Swapping one record bounded in `[a, b]` moves the sum by at most `b - a`.
pub fn sensitivity(lower: f64, upper: f64) -> Result<Sensitivity> {
    let bounds = Bounds::new(lower, upper)?;
    Sensitivity::new(bounds.width())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    pub bounds: Option<Bounds>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>, bounds: Option<Bounds>) -> Self {
        Self {
            name: name.into(),
            values,
            bounds,
        }
    }

    /// Declared bounds, or the observed `[min, max]` when none were declared.
    /// The observed range may be a single point.
    pub fn effective_range(&self) -> (f64, f64) {
        match self.bounds {
            Some(b) => (b.lower, b.upper),
            None => observed_range(&self.values),
        }
    }
}

pub(crate) fn observed_range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub name: String,
    pub values: Vec<String>,
}

/// Column-oriented numeric table with an optional categorical label column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    labels: Option<Labels>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, labels: Option<Labels>) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::domain("dataset needs at least one numeric column"));
        };
        let n = first.values.len();
        if n == 0 {
            return Err(Error::domain("dataset needs at least one record"));
        }
        for col in &columns {
            if col.values.len() != n {
                return Err(Error::domain(format!(
                    "column \"{}\" has {} values, expected {n}",
                    col.name,
                    col.values.len()
                )));
            }
            if let Some(b) = col.bounds {
                if b.lower >= b.upper {
                    return Err(Error::domain(format!(
                        "column \"{}\" has degenerate bounds",
                        col.name
                    )));
                }
            }
        }
        if let Some(labels) = &labels {
            if labels.values.len() != n {
                return Err(Error::domain(format!(
                    "label column has {} values, expected {n}",
                    labels.values.len()
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in columns
            .iter()
            .map(|c| c.name.as_str())
            .chain(labels.iter().map(|l| l.name.as_str()))
        {
            if !seen.insert(name) {
                return Err(Error::usage(format!("duplicate column name \"{name}\"")));
            }
        }
        Ok(Self { columns, labels })
    }

    pub fn n(&self) -> usize {
        self.columns[0].values.len()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<(usize, &Column)> {
        self.columns.iter().enumerate().find(|(_, c)| c.name == name)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    pub fn set_bounds(&mut self, column: usize, bounds: Option<Bounds>) {
        self.columns[column].bounds = bounds;
    }

    /// New dataset made of the given rows, in the given order; indices may repeat.
    pub fn select(&self, rows: &[usize]) -> Result<Dataset> {
        let columns = self
            .columns
            .iter()
            .map(|col| {
                Column::new(
                    col.name.clone(),
                    rows.iter().map(|&i| col.values[i]).collect(),
                    col.bounds,
                )
            })
            .collect();
        let labels = self.labels.as_ref().map(|l| Labels {
            name: l.name.clone(),
            values: rows.iter().map(|&i| l.values[i].clone()).collect(),
        });
        Dataset::new(columns, labels)
    }

    pub(crate) fn set_value(&mut self, column: usize, row: usize, value: f64) {
        self.columns[column].values[row] = value;
    }

    /// Records grouped by label, classes in ascending label order and each
    /// class's rows sorted lexicographically by value. The grouping depends
    /// only on the multiset of (row, label) pairs, not on row order.
    pub fn class_groups(&self) -> Result<Vec<ClassGroup>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::usage("operation requires a label column"))?;
        let mut groups: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
        for (i, label) in labels.values.iter().enumerate() {
            groups.entry(label.as_str()).or_default().push(self.row(i));
        }
        Ok(groups
            .into_iter()
            .map(|(label, mut rows)| {
                rows.sort_by(|a, b| cmp_rows(a, b));
                ClassGroup {
                    label: label.to_string(),
                    rows,
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassGroup {
    pub label: String,
    pub rows: Vec<Vec<f64>>,
}

pub(crate) fn cmp_rows(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Options for [`ingest_csv`].
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Declared bounds per column name.
    pub bounds: BTreeMap<String, Bounds>,
    pub label_column: Option<String>,
    /// Clip values into declared bounds instead of rejecting them.
    pub clip: bool,
}

/// Reads a UTF-8 comma-separated file with a header row. Every non-label cell
/// must parse as a finite real. Rows are numbered from 1 (first data row) in
/// error messages.
pub fn ingest_csv(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(std::io::BufReader::new(file));
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };

    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let label_idx = match &opts.label_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::usage(format!("label column \"{name}\" not found in header"))
        })?),
        None => None,
    };
    for name in opts.bounds.keys() {
        if !headers.contains(name) {
            return Err(Error::usage(format!(
                "bounds given for unknown column \"{name}\""
            )));
        }
    }

    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&i| Some(i) != label_idx).collect();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); feature_idx.len()];
    let mut label_values = Vec::new();

    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = r + 1;
        if let Some(li) = label_idx {
            label_values.push(record[li].trim().to_string());
        }
        for (slot, &ci) in feature_idx.iter().enumerate() {
            let name = &headers[ci];
            let cell = record[ci].trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: name.clone(),
                message: format!("\"{cell}\" is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: name.clone(),
                    message: format!("\"{cell}\" is not finite"),
                });
            }
            let v = match opts.bounds.get(name) {
                Some(b) if opts.clip => b.clip(v),
                Some(b) if !b.contains(v) => {
                    return Err(Error::domain(format!(
                        "value {v} at row {row}, column \"{name}\" lies outside bounds [{}, {}]",
                        b.lower, b.upper
                    )))
                }
                _ => v,
            };
            values[slot].push(v);
        }
    }

    let columns = feature_idx
        .iter()
        .zip(values)
        .map(|(&ci, vals)| {
            let name = headers[ci].clone();
            let bounds = opts.bounds.get(&name).copied();
            Column::new(name, vals, bounds)
        })
        .collect();
    let labels = label_idx.map(|li| Labels {
        name: headers[li].clone(),
        values: label_values,
    });
    Dataset::new(columns, labels)
}

/// Plugin moments of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: f64,
    /// Population variance.
    pub var: f64,
    /// Mean absolute third central moment.
    pub abs3: f64,
    /// Mean fourth central moment.
    pub cen4: f64,
    /// `n * abs3`, the estimate of the summed third absolute moments.
    pub sum_abs3: f64,
    /// `n * cen4`.
    pub sum_cen4: f64,
}

pub fn summarize(column: &[f64]) -> Result<MomentSummary> {
    if column.is_empty() {
        return Err(Error::domain("cannot summarize an empty column"));
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let nf = n as f64;

    let mean = neumaier_sum(sorted.iter().copied()) / nf;
    let dev = |p: fn(f64) -> f64| neumaier_sum(sorted.iter().map(|&x| p(x - mean))) / nf;
    let var = dev(|d| d * d);
    let abs3 = dev(|d| d.abs().powi(3));
    let cen4 = dev(|d| d.powi(4));

    Ok(MomentSummary {
        n,
        mean,
        var,
        abs3,
        cen4,
        sum_abs3: nf * abs3,
        sum_cen4: nf * cen4,
    })
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
