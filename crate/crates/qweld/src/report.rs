//! Machine-readable run reports and model files.
//!
//! Everything here serializes to JSON with a fixed field order and no
//! timestamps, so identical runs produce byte-identical files. Reports
//! embed `schema_version`; the matching JSON schemas ship under `schemas/`.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::data::Metrics;
use crate::error::{Error, Result};
use crate::qsvm::{OvrModel, QsvmModel};
use crate::vqc::VqcModel;

pub const SCHEMA_VERSION: u32 = 1;

/// Accuracy/loss/confusion block shared by reports.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub loss: f64,
    /// Row-major confusion counts, confusion[true][predicted].
    pub confusion: Vec<Vec<u64>>,
}

impl MetricsReport {
    pub fn new(metrics: &Metrics, loss: f64) -> Self {
        Self {
            accuracy: metrics.accuracy,
            loss,
            confusion: metrics.confusion.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DataSummary {
    pub n_train: usize,
    pub n_test: usize,
    pub feature_dim: usize,
    pub classes: Vec<String>,
}

/// Variational-solver diagnostics attached to quantum-backend binaries.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VqlsReport {
    pub iterations: usize,
    pub final_cost: Option<f64>,
    pub converged: bool,
    pub fidelity: f64,
    pub rescale_scale: f64,
    pub rescale_offset: f64,
    pub degraded: bool,
}

impl VqlsReport {
    pub fn from_diagnostics(d: &crate::qsvm::VqlsDiagnostics) -> Self {
        Self {
            iterations: d.iterations,
            final_cost: d.final_cost,
            converged: d.converged,
            fidelity: d.fidelity,
            rescale_scale: d.rescale_scale,
            rescale_offset: d.rescale_offset,
            degraded: d.degraded,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QsvmClassReport {
    pub class: String,
    pub kappa: f64,
    pub train_sign_agreement: f64,
    pub backend: String,
    pub vqls: Option<VqlsReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QsvmConfigEcho {
    pub lambda: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub initial_step: f64,
    pub layers: usize,
    pub mode: String,
    pub shots: u64,
    pub backend: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainQsvmReport {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: QsvmConfigEcho,
    pub data: DataSummary,
    pub per_class: Vec<QsvmClassReport>,
    pub train: MetricsReport,
    pub test: Option<MetricsReport>,
    pub degraded: bool,
    pub model_path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VqcConfigEcho {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gradient_mode: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EpochEntry {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainVqcReport {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: VqcConfigEcho,
    pub data: DataSummary,
    pub history: Vec<EpochEntry>,
    pub train: MetricsReport,
    pub test: Option<MetricsReport>,
    pub model_path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    pub feature_size: usize,
    pub status: String,
    pub train_accuracy: Option<f64>,
    pub train_loss: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub test_loss: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepReport {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub model: String,
    /// "synthetic" (blobs regenerated per size) or "csv-truncated"
    /// (columns of the input dataset truncated to each size).
    pub feature_source: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KappaEntry {
    pub lambda: f64,
    pub status: String,
    pub kappa: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub max_eigenvalue: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KappaReport {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub n_samples: usize,
    pub feature_dim: usize,
    pub entries: Vec<KappaEntry>,
}

// ---------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QsvmBinaryFile {
    pub class: String,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kappa: f64,
    pub backend: String,
    pub train_sign_agreement: f64,
    pub vqls: Option<VqlsReport>,
}

/// Versioned kernel-classifier model document. `mode` is "binary" (one
/// entry, sign decides between the two classes) or "ovr" (one entry per
/// class, argmax decides).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QsvmModelFile {
    pub format: String,
    pub format_version: u32,
    pub mode: String,
    pub encoding: String,
    pub lambda: f64,
    pub feature_dim: usize,
    pub classes: Vec<String>,
    pub binaries: Vec<QsvmBinaryFile>,
    pub support_vectors: Vec<Vec<f64>>,
}

pub const QSVM_MODEL_FORMAT: &str = "qweld-qsvm-model";
pub const VQC_MODEL_FORMAT: &str = "qweld-vqc-model";

fn binary_entry(model: &QsvmModel, class: &str) -> QsvmBinaryFile {
    QsvmBinaryFile {
        class: class.to_string(),
        alphas: model.alphas.clone(),
        bias: model.bias,
        kappa: model.kappa,
        backend: model.backend.as_str().to_string(),
        train_sign_agreement: model.train_sign_agreement,
        vqls: model.vqls.as_ref().map(VqlsReport::from_diagnostics),
    }
}

impl QsvmModelFile {
    /// Binary (2-class) document: one entry for the positive class.
    pub fn from_binary(model: &QsvmModel, classes: &[String]) -> Self {
        Self {
            format: QSVM_MODEL_FORMAT.into(),
            format_version: SCHEMA_VERSION,
            mode: "binary".into(),
            encoding: "amplitude".into(),
            lambda: model.lambda,
            feature_dim: model.dim,
            classes: classes.to_vec(),
            binaries: vec![binary_entry(model, &classes[1])],
            support_vectors: model.support_vectors.clone(),
        }
    }

    /// One-vs-rest document with one entry per class.
    pub fn from_ovr(model: &OvrModel, class_names: &[String]) -> Self {
        let first = &model.binaries[0];
        Self {
            format: QSVM_MODEL_FORMAT.into(),
            format_version: SCHEMA_VERSION,
            mode: "ovr".into(),
            encoding: "amplitude".into(),
            lambda: first.lambda,
            feature_dim: first.dim,
            classes: class_names.to_vec(),
            binaries: model
                .binaries
                .iter()
                .zip(&model.classes)
                .map(|(b, &c)| binary_entry(b, &class_names[c]))
                .collect(),
            support_vectors: first.support_vectors.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VqcTrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gradient_mode: String,
    pub final_loss: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VqcModelFile {
    pub format: String,
    pub format_version: u32,
    pub feature_dim: usize,
    pub num_classes: usize,
    pub classes: Vec<String>,
    pub w_in: Vec<Vec<f64>>,
    pub b_in: Vec<f64>,
    pub theta: Vec<f64>,
    pub w_out: Vec<Vec<f64>>,
    pub b_out: Vec<f64>,
    pub training: VqcTrainingMeta,
}

impl VqcModelFile {
    pub fn from_model(model: &VqcModel, classes: &[String], training: VqcTrainingMeta) -> Self {
        Self {
            format: VQC_MODEL_FORMAT.into(),
            format_version: SCHEMA_VERSION,
            feature_dim: model.dim,
            num_classes: model.num_classes,
            classes: classes.to_vec(),
            w_in: model.w_in.clone(),
            b_in: model.b_in.clone(),
            theta: model.theta.clone(),
            w_out: model.w_out.clone(),
            b_out: model.b_out.clone(),
            training,
        }
    }

    pub fn to_model(&self) -> VqcModel {
        VqcModel {
            w_in: self.w_in.clone(),
            b_in: self.b_in.clone(),
            theta: self.theta.clone(),
            w_out: self.w_out.clone(),
            b_out: self.b_out.clone(),
            num_classes: self.num_classes,
            dim: self.feature_dim,
        }
    }
}

/// Pretty-printed JSON with a trailing newline; the byte-stable output
/// format for every report and model document.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, to_json_bytes(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Loads and format-checks a saved VQC model document.
pub fn load_vqc_model(path: &Path) -> Result<VqcModelFile> {
    let file: VqcModelFile = read_json(path)?;
    if file.format != VQC_MODEL_FORMAT || file.format_version != SCHEMA_VERSION {
        return Err(Error::ModelFormat(format!(
            "expected {VQC_MODEL_FORMAT} v{SCHEMA_VERSION}, got {} v{}",
            file.format, file.format_version
        )));
    }
    Ok(file)
}

/// Loads and format-checks a saved kernel-classifier document.
pub fn load_qsvm_model(path: &Path) -> Result<QsvmModelFile> {
    let file: QsvmModelFile = read_json(path)?;
    if file.format != QSVM_MODEL_FORMAT || file.format_version != SCHEMA_VERSION {
        return Err(Error::ModelFormat(format!(
            "expected {QSVM_MODEL_FORMAT} v{SCHEMA_VERSION}, got {} v{}",
            file.format, file.format_version
        )));
    }
    Ok(file)
}
