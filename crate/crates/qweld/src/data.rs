//! Feature-vector ingestion, synthetic dataset generation and metric
//! computation.
//!
//! CSV format: UTF-8, header `f0,f1,…,f{d-1},label`, one sample per line,
//! label a non-negative integer. Labels are remapped to contiguous [0, C)
//! with the original ids retained as class names.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// In-memory dataset: n rows of d features plus one class label each.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub d: usize,
}

impl FeatureDataset {
    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Indices of samples carrying each label.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.num_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        by_class
    }

    fn validate(&self) -> Result<()> {
        if self.features.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                left: self.features.len(),
                right: self.labels.len(),
            });
        }
        for (row, x) in self.features.iter().enumerate() {
            if x.len() != self.d {
                return Err(Error::DimensionMismatch {
                    left: x.len(),
                    right: self.d,
                });
            }
            if let Some(col) = x.iter().position(|v| !v.is_finite()) {
                return Err(Error::Csv {
                    path: String::new(),
                    row: row + 2,
                    msg: format!("non-finite feature in column {col}"),
                });
            }
        }
        let c = self.num_classes();
        for (row, &l) in self.labels.iter().enumerate() {
            if l >= c {
                return Err(Error::LabelOutOfRange {
                    label: l,
                    classes: c,
                    row: row + 2,
                });
            }
        }
        Ok(())
    }

    /// Keeps only the first `d` feature columns.
    pub fn truncate_features(&self, d: usize) -> Result<FeatureDataset> {
        if d == 0 || d > self.d {
            return Err(Error::Config(format!(
                "cannot truncate {} columns to {d}",
                self.d
            )));
        }
        Ok(FeatureDataset {
            features: self.features.iter().map(|x| x[..d].to_vec()).collect(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
            d,
        })
    }
}

/// Reads a dataset from CSV. Labels are remapped to contiguous [0, C) in
/// ascending order of the original ids, which become the class names.
/// When `declared_classes` is given, original labels must lie in that range.
pub fn load_csv(path: &Path, declared_classes: Option<usize>) -> Result<FeatureDataset> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: display.clone(),
            row: 0,
            msg: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: display.clone(),
            row: 1,
            msg: e.to_string(),
        })?
        .clone();
    if headers.len() < 2 || headers.iter().next_back() != Some("label") {
        return Err(Error::Csv {
            path: display,
            row: 1,
            msg: "header must be f0,…,f{d-1},label".into(),
        });
    }
    let d = headers.len() - 1;

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // header is row 1
        let record = record.map_err(|e| Error::Csv {
            path: display.clone(),
            row,
            msg: e.to_string(),
        })?;
        let mut x = Vec::with_capacity(d);
        for col in 0..d {
            let cell = record.get(col).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| Error::Csv {
                path: display.clone(),
                row,
                msg: format!("non-numeric cell '{cell}' in column {col}"),
            })?;
            x.push(v);
        }
        let label_cell = record.get(d).unwrap_or("");
        let label: usize = label_cell.trim().parse().map_err(|_| Error::Csv {
            path: display.clone(),
            row,
            msg: format!("non-integer label '{label_cell}'"),
        })?;
        if let Some(c) = declared_classes {
            if label >= c {
                return Err(Error::LabelOutOfRange {
                    label,
                    classes: c,
                    row,
                });
            }
        }
        features.push(x);
        raw_labels.push(label);
    }
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut ids: Vec<usize> = raw_labels.clone();
    ids.sort_unstable();
    ids.dedup();
    let labels = raw_labels
        .iter()
        .map(|l| ids.binary_search(l).unwrap())
        .collect();
    let ds = FeatureDataset {
        features,
        labels,
        class_names: ids.iter().map(|id| id.to_string()).collect(),
        d,
    };
    ds.validate()?;
    Ok(ds)
}

/// Writes the dataset in the CSV format accepted by [`load_csv`]. Class
/// names that parse as integers are written back as the original label ids.
pub fn save_csv(ds: &FeatureDataset, path: &Path) -> Result<()> {
    ds.validate()?;
    let mut out = Vec::new();
    for i in 0..ds.d {
        if i > 0 {
            out.extend_from_slice(b",");
        }
        write!(out, "f{i}")?;
    }
    out.extend_from_slice(b",label\n");
    for (x, &label) in ds.features.iter().zip(&ds.labels) {
        for v in x {
            write!(out, "{v},")?;
        }
        let id = ds.class_names[label].parse::<usize>().unwrap_or(label);
        writeln!(out, "{id}")?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Isotropic unit-variance Gaussian clusters, one per class, centered at
/// `separation`·e_c on mutually orthogonal axes. Deterministic per seed.
pub fn synth_blobs(
    n_per_class: usize,
    d: usize,
    classes: usize,
    separation: f64,
    seed: u64,
) -> Result<FeatureDataset> {
    if n_per_class < 1 || d < 2 || classes < 2 || separation <= 0.0 {
        return Err(Error::Config(format!(
            "invalid blob sizes: n_per_class={n_per_class}, d={d}, classes={classes}, separation={separation}"
        )));
    }
    if classes > d {
        return Err(Error::Config(format!(
            "classes ({classes}) cannot exceed feature dimension ({d})"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n_per_class * classes);
    let mut labels = Vec::with_capacity(n_per_class * classes);
    for c in 0..classes {
        for _ in 0..n_per_class {
            let mut x: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
            x[c] += separation;
            features.push(x);
            labels.push(c);
        }
    }
    Ok(FeatureDataset {
        features,
        labels,
        class_names: (0..classes).map(|c| c.to_string()).collect(),
        d,
    })
}

// Box-Muller transform; one draw per call keeps the stream layout simple.
fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

/// Splits the dataset into disjoint train/test parts. Stratified mode
/// preserves class ratios within one sample per class.
pub fn split(ds: &FeatureDataset, spec: &SplitSpec) -> Result<(FeatureDataset, FeatureDataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::EmptySplit(spec.train_fraction));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();

    if spec.stratified {
        // Largest-remainder allocation: per-class floor counts, then the
        // remaining train slots go to the classes with the biggest
        // fractional parts, keeping class ratios within one sample.
        let by_class: Vec<Vec<usize>> = ds
            .class_indices()
            .into_iter()
            .filter(|v| !v.is_empty())
            .collect();
        let total_train = ((ds.n() as f64) * spec.train_fraction).round() as usize;
        let mut counts: Vec<usize> = Vec::with_capacity(by_class.len());
        let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(by_class.len());
        for (c, indices) in by_class.iter().enumerate() {
            let exact = (indices.len() as f64) * spec.train_fraction;
            counts.push(exact.floor() as usize);
            remainders.push((exact - exact.floor(), c));
        }
        let mut leftover = total_train.saturating_sub(counts.iter().sum::<usize>());
        remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, c) in &remainders {
            if leftover == 0 {
                break;
            }
            if counts[c] < by_class[c].len() {
                counts[c] += 1;
                leftover -= 1;
            }
        }
        for (indices, &n_train) in by_class.iter().zip(&counts) {
            if n_train == 0 || n_train == indices.len() {
                return Err(Error::EmptySplit(spec.train_fraction));
            }
            let mut shuffled = indices.clone();
            shuffled.shuffle(&mut rng);
            train_idx.extend_from_slice(&shuffled[..n_train]);
            test_idx.extend_from_slice(&shuffled[n_train..]);
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
    } else {
        let mut all: Vec<usize> = (0..ds.n()).collect();
        all.shuffle(&mut rng);
        let n_train = ((ds.n() as f64) * spec.train_fraction).round() as usize;
        if n_train == 0 || n_train == ds.n() {
            return Err(Error::EmptySplit(spec.train_fraction));
        }
        train_idx = all[..n_train].to_vec();
        test_idx = all[n_train..].to_vec();
    }

    let take = |idx: &[usize]| FeatureDataset {
        features: idx.iter().map(|&i| ds.features[i].clone()).collect(),
        labels: idx.iter().map(|&i| ds.labels[i]).collect(),
        class_names: ds.class_names.clone(),
        d: ds.d,
    };
    Ok((take(&train_idx), take(&test_idx)))
}

/// Numerically stabilized softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Accuracy and confusion counts; `confusion[true][predicted]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub confusion: Vec<Vec<u64>>,
}

/// Counts argmax-correct predictions and fills the confusion matrix.
pub fn metrics(predictions: &[usize], labels: &[usize], classes: usize) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut confusion = vec![vec![0u64; classes]; classes];
    let mut correct = 0usize;
    for (row, (&p, &l)) in predictions.iter().zip(labels).enumerate() {
        if l >= classes {
            return Err(Error::LabelOutOfRange {
                label: l,
                classes,
                row,
            });
        }
        if p >= classes {
            return Err(Error::LabelOutOfRange {
                label: p,
                classes,
                row,
            });
        }
        confusion[l][p] += 1;
        if p == l {
            correct += 1;
        }
    }
    Ok(Metrics {
        accuracy: correct as f64 / predictions.len() as f64,
        confusion,
    })
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Mean −log p(true class) over per-sample class probabilities.
pub fn cross_entropy(probabilities: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if probabilities.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            left: probabilities.len(),
            right: labels.len(),
        });
    }
    if probabilities.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for (p, &l) in probabilities.iter().zip(labels) {
        total -= p[l].max(1e-300).ln();
    }
    Ok(total / probabilities.len() as f64)
}
