//! Command-line driver: `qweld <gen-data|train-qsvm|train-vqc|sweep|kappa>`.
//!
//! Every command is deterministic given its full argument list including
//! seeds. Flags override the optional `--config` file (a flat TOML table
//! whose keys mirror the flag names); built-in defaults fill the rest.
//! Exit codes: 0 success, 1 degraded or failed training, 2 usage errors.

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use std::path::{Path, PathBuf};

use crate::data::{self, FeatureDataset, SplitSpec};
use crate::error::{Error, Result};
use crate::optim::DfoConfig;
use crate::qkernel;
use crate::qsvm::{self, Backend, OvrModel, QsvmModel, QsvmTrainConfig};
use crate::report::*;
use crate::sim::{derive_seed, ShotConfig};
use crate::vqc;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_MAX_ITERS: usize = 300;
pub const DEFAULT_INITIAL_STEP: f64 = 0.5;
pub const DEFAULT_LAYERS: usize = 1;
pub const DEFAULT_SHOTS: u64 = 10_000;
pub const DEFAULT_EPOCHS: usize = 50;
pub const DEFAULT_BATCH_SIZE: usize = 16;
pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;
pub const SWEEP_PRESET: [usize; 5] = [7, 15, 31, 63, 127];

#[derive(Parser, Debug)]
#[command(
    name = "qweld",
    version,
    about = "Hybrid quantum-classical weld-defect classifiers on a statevector simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic blob dataset as CSV.
    GenData(GenDataArgs),
    /// Train the kernel classifier (variational or classical backend).
    TrainQsvm(TrainQsvmArgs),
    /// Train the variational-circuit classifier.
    TrainVqc(TrainVqcArgs),
    /// Train/evaluate a model across a list of feature sizes.
    Sweep(SweepArgs),
    /// Condition numbers of the regularized kernel matrix.
    Kappa(KappaArgs),
}

#[derive(Args, Debug, Default)]
pub struct GenDataArgs {
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct TrainQsvmArgs {
    /// Training dataset (CSV).
    #[arg(long)]
    pub data: PathBuf,
    /// Held-out dataset (CSV). Mutually exclusive with --train-fraction.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    /// Stratified split fraction applied to --data.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub initial_step: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// Estimate overlaps from shot samples instead of exact expectations.
    #[arg(long, conflicts_with = "exact")]
    pub sampled: bool,
    /// Exact expectation values (the default).
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub shots: Option<u64>,
    /// "quantum" (default) or "classical" (oracle baseline).
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output prefix; writes <out>.model.json and <out>.report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct TrainVqcArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// "parameter-shift" (default) or "finite-difference-check".
    #[arg(long)]
    pub gradient_mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    /// "vqc" or "qsvm".
    #[arg(long)]
    pub model: String,
    /// Comma-separated feature sizes (default 7,15,31,63,127).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// CSV dataset; columns are truncated to each sweep size.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Synthetic mode: samples per class (blobs regenerated per size).
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub initial_step: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long, conflicts_with = "exact")]
    pub sampled: bool,
    /// Exact expectation values (the default).
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; ".csv" writes the table as CSV, anything else as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct KappaArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated regularization values (default 0.01,0.1,1).
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

// ---------------------------------------------------------------------
// Config-file merging: flags override file values, defaults fill the rest.
// ---------------------------------------------------------------------

struct FileConfig(Option<toml::Table>);

impl FileConfig {
    fn load(path: &Option<PathBuf>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self(None));
        };
        let text = std::fs::read_to_string(path)?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(Self(Some(table)))
    }

    fn value(&self, key: &str) -> Option<&toml::Value> {
        let table = self.0.as_ref()?;
        table.get(key).or_else(|| table.get(&key.replace('_', "-")))
    }

    fn usize_of(&self, key: &str) -> Option<usize> {
        self.value(key)?.as_integer().map(|v| v as usize)
    }

    fn u64_of(&self, key: &str) -> Option<u64> {
        self.value(key)?.as_integer().map(|v| v as u64)
    }

    fn f64_of(&self, key: &str) -> Option<f64> {
        let v = self.value(key)?;
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }

    fn string_of(&self, key: &str) -> Option<String> {
        self.value(key)?.as_str().map(str::to_string)
    }

    fn bool_of(&self, key: &str) -> Option<bool> {
        self.value(key)?.as_bool()
    }
}

fn parse_backend(s: &str) -> Result<Backend> {
    match s {
        "quantum" => Ok(Backend::Quantum),
        "classical" => Ok(Backend::Classical),
        other => Err(Error::Config(format!(
            "unknown backend '{other}' (expected quantum|classical)"
        ))),
    }
}

fn parse_gradient_mode(s: &str) -> Result<vqc::GradientMode> {
    match s {
        "parameter-shift" => Ok(vqc::GradientMode::ParameterShift),
        "finite-difference-check" => Ok(vqc::GradientMode::FiniteDifferenceCheck),
        other => Err(Error::Config(format!(
            "unknown gradient mode '{other}' (expected parameter-shift|finite-difference-check)"
        ))),
    }
}

fn shot_config(sampled: bool, shots: u64, seed: u64) -> Result<ShotConfig> {
    if sampled {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(ShotConfig::sampled(shots, seed))
    } else {
        Ok(ShotConfig::exact())
    }
}

/// Loads --data / --test-data and applies the optional stratified split.
fn load_train_test(
    data: &Path,
    test_data: &Option<PathBuf>,
    train_fraction: Option<f64>,
    seed: u64,
) -> Result<(FeatureDataset, Option<FeatureDataset>)> {
    let ds = data::load_csv(data, None)?;
    match (test_data, train_fraction) {
        (Some(_), Some(_)) => Err(Error::Config(
            "--test-data and --train-fraction are mutually exclusive".into(),
        )),
        (Some(path), None) => {
            let test = data::load_csv(path, None)?;
            if test.d != ds.d {
                return Err(Error::Config(format!(
                    "test dataset has {} features, train has {}",
                    test.d, ds.d
                )));
            }
            Ok((ds, Some(test)))
        }
        (None, Some(fraction)) => {
            let (train, test) = data::split(
                &ds,
                &SplitSpec {
                    train_fraction: fraction,
                    seed: derive_seed(seed, 0x5011),
                    stratified: true,
                },
            )?;
            Ok((train, Some(test)))
        }
        (None, None) => Ok((ds, None)),
    }
}

// ---------------------------------------------------------------------
// Trained kernel classifier (binary for 2 classes, one-vs-rest beyond).
// ---------------------------------------------------------------------

enum TrainedQsvm {
    Binary(QsvmModel),
    Ovr(OvrModel),
}

impl TrainedQsvm {
    fn binaries(&self) -> Vec<&QsvmModel> {
        match self {
            TrainedQsvm::Binary(m) => vec![m],
            TrainedQsvm::Ovr(m) => m.binaries.iter().collect(),
        }
    }

    /// Per-class scores; for the binary mode these are (−f, +f).
    fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            TrainedQsvm::Binary(m) => {
                let f = qsvm::decision(m, x)?;
                Ok(vec![-f, f])
            }
            TrainedQsvm::Ovr(m) => qsvm::decision_values(m, x),
        }
    }

    fn predict(&self, x: &[f64]) -> Result<usize> {
        match self {
            TrainedQsvm::Binary(m) => Ok(usize::from(qsvm::decision(m, x)? > 0.0)),
            TrainedQsvm::Ovr(m) => qsvm::predict_ovr(m, x),
        }
    }

    fn class_labels(&self, num_classes: usize) -> Vec<usize> {
        match self {
            TrainedQsvm::Binary(_) => vec![1],
            TrainedQsvm::Ovr(_) => (0..num_classes).collect(),
        }
    }
}

fn evaluate_qsvm(model: &TrainedQsvm, ds: &FeatureDataset) -> Result<(MetricsReport, Vec<usize>)> {
    let mut predictions = Vec::with_capacity(ds.n());
    let mut probs = Vec::with_capacity(ds.n());
    for x in &ds.features {
        predictions.push(model.predict(x)?);
        probs.push(data::softmax(&model.scores(x)?));
    }
    let metrics = data::metrics(&predictions, &ds.labels, ds.num_classes())?;
    let loss = data::cross_entropy(&probs, &ds.labels)?;
    Ok((MetricsReport::new(&metrics, loss), predictions))
}

fn train_qsvm_classifier(train: &FeatureDataset, cfg: &QsvmTrainConfig) -> Result<TrainedQsvm> {
    if train.num_classes() < 2 {
        return Err(Error::TooFewClasses(train.num_classes()));
    }
    if train.num_classes() == 2 {
        let y: Vec<f64> = train
            .labels
            .iter()
            .map(|&l| if l == 1 { 1.0 } else { -1.0 })
            .collect();
        Ok(TrainedQsvm::Binary(qsvm::train_binary(
            &train.features,
            &y,
            cfg,
        )?))
    } else {
        Ok(TrainedQsvm::Ovr(qsvm::train_ovr(
            &train.features,
            &train.labels,
            cfg,
        )?))
    }
}

// ---------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------

fn cmd_gen_data(args: &GenDataArgs) -> Result<i32> {
    let file = FileConfig::load(&args.config)?;
    let classes = args.classes.or(file.usize_of("classes")).unwrap_or(3);
    let per_class = args.per_class.or(file.usize_of("per_class")).unwrap_or(40);
    let dim = args.dim.or(file.usize_of("dim")).unwrap_or(63);
    let separation = args
        .separation
        .or(file.f64_of("separation"))
        .unwrap_or(10.0);
    let seed = args.seed.or(file.u64_of("seed")).unwrap_or(DEFAULT_SEED);

    let ds = data::synth_blobs(per_class, dim, classes, separation, seed)?;
    data::save_csv(&ds, &args.out)?;
    println!(
        "gen-data: wrote {} samples ({} classes x {}, dim {}) to {}",
        ds.n(),
        classes,
        per_class,
        dim,
        args.out.display()
    );
    Ok(0)
}

fn cmd_train_qsvm(args: &TrainQsvmArgs) -> Result<i32> {
    let file = FileConfig::load(&args.config)?;
    let seed = args.seed.or(file.u64_of("seed")).unwrap_or(DEFAULT_SEED);
    let lambda = args
        .lambda
        .or(file.f64_of("lambda"))
        .unwrap_or(DEFAULT_LAMBDA);
    let epsilon = args
        .epsilon
        .or(file.f64_of("epsilon"))
        .unwrap_or(DEFAULT_EPSILON);
    let max_iters = args
        .max_iters
        .or(file.usize_of("max_iters"))
        .unwrap_or(DEFAULT_MAX_ITERS);
    let initial_step = args
        .initial_step
        .or(file.f64_of("initial_step"))
        .unwrap_or(DEFAULT_INITIAL_STEP);
    let layers = args
        .layers
        .or(file.usize_of("layers"))
        .unwrap_or(DEFAULT_LAYERS);
    let sampled = if args.exact {
        false
    } else {
        args.sampled || file.bool_of("sampled").unwrap_or(false)
    };
    let shots = args.shots.or(file.u64_of("shots")).unwrap_or(DEFAULT_SHOTS);
    let backend = parse_backend(
        &args
            .backend
            .clone()
            .or(file.string_of("backend"))
            .unwrap_or_else(|| "quantum".into()),
    )?;
    if lambda <= 0.0 {
        return Err(Error::Config("lambda must be positive".into()));
    }
    if epsilon <= 0.0 {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    if layers == 0 {
        return Err(Error::Config("layers must be at least 1".into()));
    }
    let shots_cfg = shot_config(sampled, shots, derive_seed(seed, 0x5607))?;
    let train_fraction = args.train_fraction.or(file.f64_of("train_fraction"));

    let (train, test) = load_train_test(&args.data, &args.test_data, train_fraction, seed)?;
    let cfg = QsvmTrainConfig {
        lambda,
        layers,
        dfo: DfoConfig {
            epsilon,
            max_iters,
            initial_step,
            seed,
        },
        shots: shots_cfg,
        backend,
    };

    let model = train_qsvm_classifier(&train, &cfg)?;
    let (train_metrics, _) = evaluate_qsvm(&model, &train)?;
    let test_metrics = match &test {
        Some(ds) => Some(evaluate_qsvm(&model, ds)?.0),
        None => None,
    };

    let binaries = model.binaries();
    let per_class: Vec<QsvmClassReport> = binaries
        .iter()
        .zip(model.class_labels(train.num_classes()))
        .map(|(b, class)| QsvmClassReport {
            class: train.class_names[class].clone(),
            kappa: b.kappa,
            train_sign_agreement: b.train_sign_agreement,
            backend: b.backend.as_str().to_string(),
            vqls: b.vqls.as_ref().map(VqlsReport::from_diagnostics),
        })
        .collect();
    let degraded = backend == Backend::Quantum
        && binaries
            .iter()
            .all(|b| b.vqls.as_ref().is_some_and(|d| d.degraded));

    let model_path = args.out.as_ref().map(|p| with_suffix(p, ".model.json"));
    let report_path = args.out.as_ref().map(|p| with_suffix(p, ".report.json"));
    if let Some(path) = &model_path {
        let doc = match &model {
            TrainedQsvm::Binary(m) => QsvmModelFile::from_binary(m, &train.class_names),
            TrainedQsvm::Ovr(m) => QsvmModelFile::from_ovr(m, &train.class_names),
        };
        write_json(&doc, path)?;
    }

    let report = TrainQsvmReport {
        schema_version: SCHEMA_VERSION,
        command: "train-qsvm".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        config: QsvmConfigEcho {
            lambda,
            epsilon,
            max_iters,
            initial_step,
            layers,
            mode: if sampled { "sampled" } else { "exact" }.into(),
            shots: if sampled { shots } else { 0 },
            backend: backend.as_str().into(),
        },
        data: DataSummary {
            n_train: train.n(),
            n_test: test.as_ref().map_or(0, FeatureDataset::n),
            feature_dim: train.d,
            classes: train.class_names.clone(),
        },
        per_class,
        train: train_metrics,
        test: test_metrics,
        degraded,
        model_path: model_path.map(|p| p.display().to_string()),
    };
    if let Some(path) = &report_path {
        write_json(&report, path)?;
    }

    println!(
        "train-qsvm[{}]: train accuracy {:.4}, loss {:.4}{}",
        backend.as_str(),
        report.train.accuracy,
        report.train.loss,
        report
            .test
            .as_ref()
            .map(|t| format!(", test accuracy {:.4}, loss {:.4}", t.accuracy, t.loss))
            .unwrap_or_default()
    );
    for entry in &report.per_class {
        let diag = entry
            .vqls
            .as_ref()
            .map(|v| {
                format!(
                    "iterations {}, final cost {}, converged {}, fidelity {:.4}{}",
                    v.iterations,
                    v.final_cost.map_or("-".into(), |c| format!("{c:.6}")),
                    v.converged,
                    v.fidelity,
                    if v.degraded { ", DEGRADED" } else { "" }
                )
            })
            .unwrap_or_else(|| "classical solve".into());
        println!(
            "  class {}: kappa {:.4}, sign agreement {:.4}, {}",
            entry.class, entry.kappa, entry.train_sign_agreement, diag
        );
    }
    Ok(if degraded { 1 } else { 0 })
}

fn cmd_train_vqc(args: &TrainVqcArgs) -> Result<i32> {
    let file = FileConfig::load(&args.config)?;
    let seed = args.seed.or(file.u64_of("seed")).unwrap_or(DEFAULT_SEED);
    let epochs = args
        .epochs
        .or(file.usize_of("epochs"))
        .unwrap_or(DEFAULT_EPOCHS);
    let batch_size = args
        .batch_size
        .or(file.usize_of("batch_size"))
        .unwrap_or(DEFAULT_BATCH_SIZE);
    let lr = args
        .lr
        .or(file.f64_of("lr"))
        .unwrap_or(DEFAULT_LEARNING_RATE);
    let mode = parse_gradient_mode(
        &args
            .gradient_mode
            .clone()
            .or(file.string_of("gradient_mode"))
            .unwrap_or_else(|| "parameter-shift".into()),
    )?;
    if lr <= 0.0 {
        return Err(Error::Config("learning rate must be positive".into()));
    }
    let train_fraction = args.train_fraction.or(file.f64_of("train_fraction"));

    let (train, test) = load_train_test(&args.data, &args.test_data, train_fraction, seed)?;
    let cfg = vqc::TrainConfig {
        epochs,
        batch_size: batch_size.min(train.n()).max(1),
        learning_rate: lr,
        seed,
        gradient_mode: mode,
    };
    if batch_size == 0 || batch_size > train.n() {
        return Err(Error::BatchTooLarge {
            batch: batch_size,
            n: train.n(),
        });
    }

    let (model, history) = vqc::train(&train.features, &train.labels, &cfg)?;
    let train_eval = vqc::evaluate(&model, &train.features, &train.labels)?;
    let test_eval = match &test {
        Some(ds) => Some(vqc::evaluate(&model, &ds.features, &ds.labels)?),
        None => None,
    };

    let model_path = args.out.as_ref().map(|p| with_suffix(p, ".model.json"));
    let report_path = args.out.as_ref().map(|p| with_suffix(p, ".report.json"));
    if let Some(path) = &model_path {
        let doc = VqcModelFile::from_model(
            &model,
            &train.class_names,
            VqcTrainingMeta {
                seed,
                epochs,
                batch_size: cfg.batch_size,
                learning_rate: lr,
                gradient_mode: match mode {
                    vqc::GradientMode::ParameterShift => "parameter-shift".into(),
                    vqc::GradientMode::FiniteDifferenceCheck => "finite-difference-check".into(),
                },
                final_loss: history.last().map(|h| h.loss),
            },
        );
        write_json(&doc, path)?;
    }

    let report = TrainVqcReport {
        schema_version: SCHEMA_VERSION,
        command: "train-vqc".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        config: VqcConfigEcho {
            epochs,
            batch_size: cfg.batch_size,
            learning_rate: lr,
            gradient_mode: match mode {
                vqc::GradientMode::ParameterShift => "parameter-shift".into(),
                vqc::GradientMode::FiniteDifferenceCheck => "finite-difference-check".into(),
            },
        },
        data: DataSummary {
            n_train: train.n(),
            n_test: test.as_ref().map_or(0, FeatureDataset::n),
            feature_dim: train.d,
            classes: train.class_names.clone(),
        },
        history: history
            .iter()
            .map(|h| EpochEntry {
                epoch: h.epoch,
                loss: h.loss,
                accuracy: h.accuracy,
            })
            .collect(),
        train: MetricsReport::new(&train_eval.metrics, train_eval.loss),
        test: test_eval
            .as_ref()
            .map(|e| MetricsReport::new(&e.metrics, e.loss)),
        model_path: model_path.map(|p| p.display().to_string()),
    };
    if let Some(path) = &report_path {
        write_json(&report, path)?;
    }

    println!(
        "train-vqc: {} epochs, train accuracy {:.4}, loss {:.4}{}",
        epochs,
        report.train.accuracy,
        report.train.loss,
        report
            .test
            .as_ref()
            .map(|t| format!(", test accuracy {:.4}, loss {:.4}", t.accuracy, t.loss))
            .unwrap_or_default()
    );
    Ok(0)
}

struct SweepCell {
    train: FeatureDataset,
    test: FeatureDataset,
}

fn sweep_cell_data(
    size: usize,
    csv: &Option<FeatureDataset>,
    per_class: usize,
    classes: usize,
    separation: f64,
    train_fraction: f64,
    seed: u64,
) -> Result<SweepCell> {
    let cell_seed = derive_seed(seed, size as u64);
    let full = match csv {
        Some(ds) => ds.truncate_features(size)?,
        None => data::synth_blobs(per_class, size, classes, separation, cell_seed)?,
    };
    let (train, test) = data::split(
        &full,
        &SplitSpec {
            train_fraction,
            seed: derive_seed(cell_seed, 0x5011),
            stratified: true,
        },
    )?;
    Ok(SweepCell { train, test })
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let file = FileConfig::load(&args.config)?;
    let seed = args.seed.or(file.u64_of("seed")).unwrap_or(DEFAULT_SEED);
    let sizes = args.sizes.clone().unwrap_or_else(|| SWEEP_PRESET.to_vec());
    if sizes.is_empty() {
        return Err(Error::Config("empty sweep size list".into()));
    }
    let per_class = args.per_class.or(file.usize_of("per_class")).unwrap_or(40);
    let classes = args.classes.or(file.usize_of("classes")).unwrap_or(2);
    let separation = args
        .separation
        .or(file.f64_of("separation"))
        .unwrap_or(10.0);
    let train_fraction = args
        .train_fraction
        .or(file.f64_of("train_fraction"))
        .unwrap_or(DEFAULT_TRAIN_FRACTION);

    let csv = match &args.data {
        Some(path) => {
            let ds = data::load_csv(path, None)?;
            let max = *sizes.iter().max().unwrap();
            if ds.d < max {
                return Err(Error::Config(format!(
                    "dataset has {} feature columns, sweep needs {max}",
                    ds.d
                )));
            }
            Some(ds)
        }
        None => None,
    };

    enum SweepModel {
        Vqc(vqc::TrainConfig),
        Qsvm(QsvmTrainConfig),
    }
    let model = match args.model.as_str() {
        "vqc" => SweepModel::Vqc(vqc::TrainConfig {
            epochs: args
                .epochs
                .or(file.usize_of("epochs"))
                .unwrap_or(DEFAULT_EPOCHS),
            batch_size: args
                .batch_size
                .or(file.usize_of("batch_size"))
                .unwrap_or(DEFAULT_BATCH_SIZE),
            learning_rate: args
                .lr
                .or(file.f64_of("lr"))
                .unwrap_or(DEFAULT_LEARNING_RATE),
            seed,
            gradient_mode: vqc::GradientMode::ParameterShift,
        }),
        "qsvm" => SweepModel::Qsvm(QsvmTrainConfig {
            lambda: args
                .lambda
                .or(file.f64_of("lambda"))
                .unwrap_or(DEFAULT_LAMBDA),
            layers: args
                .layers
                .or(file.usize_of("layers"))
                .unwrap_or(DEFAULT_LAYERS),
            dfo: DfoConfig {
                epsilon: args
                    .epsilon
                    .or(file.f64_of("epsilon"))
                    .unwrap_or(DEFAULT_EPSILON),
                max_iters: args
                    .max_iters
                    .or(file.usize_of("max_iters"))
                    .unwrap_or(DEFAULT_MAX_ITERS),
                initial_step: args
                    .initial_step
                    .or(file.f64_of("initial_step"))
                    .unwrap_or(DEFAULT_INITIAL_STEP),
                seed,
            },
            shots: shot_config(
                if args.exact {
                    false
                } else {
                    args.sampled || file.bool_of("sampled").unwrap_or(false)
                },
                args.shots.or(file.u64_of("shots")).unwrap_or(DEFAULT_SHOTS),
                derive_seed(seed, 0x5607),
            )?,
            backend: parse_backend(
                &args
                    .backend
                    .clone()
                    .or(file.string_of("backend"))
                    .unwrap_or_else(|| "quantum".into()),
            )?,
        }),
        other => {
            return Err(Error::Config(format!(
                "unknown sweep model '{other}' (expected vqc|qsvm)"
            )))
        }
    };

    let mut rows = Vec::with_capacity(sizes.len());
    for &size in &sizes {
        let outcome = sweep_cell_data(
            size,
            &csv,
            per_class,
            classes,
            separation,
            train_fraction,
            seed,
        )
        .and_then(|cell| -> Result<(f64, f64, f64, f64)> {
            match &model {
                SweepModel::Vqc(cfg) => {
                    let mut cell_cfg = *cfg;
                    cell_cfg.seed = derive_seed(seed, size as u64);
                    cell_cfg.batch_size = cell_cfg.batch_size.min(cell.train.n());
                    let (m, _) = vqc::train(&cell.train.features, &cell.train.labels, &cell_cfg)?;
                    let tr = vqc::evaluate(&m, &cell.train.features, &cell.train.labels)?;
                    let te = vqc::evaluate(&m, &cell.test.features, &cell.test.labels)?;
                    Ok((tr.metrics.accuracy, tr.loss, te.metrics.accuracy, te.loss))
                }
                SweepModel::Qsvm(cfg) => {
                    let mut cell_cfg = cfg.clone();
                    cell_cfg.dfo.seed = derive_seed(seed, size as u64);
                    let m = train_qsvm_classifier(&cell.train, &cell_cfg)?;
                    let (tr, _) = evaluate_qsvm(&m, &cell.train)?;
                    let (te, _) = evaluate_qsvm(&m, &cell.test)?;
                    Ok((tr.accuracy, tr.loss, te.accuracy, te.loss))
                }
            }
        });
        rows.push(match outcome {
            Ok((tra, trl, tea, tel)) => SweepRow {
                feature_size: size,
                status: "ok".into(),
                train_accuracy: Some(tra),
                train_loss: Some(trl),
                test_accuracy: Some(tea),
                test_loss: Some(tel),
                error: None,
            },
            Err(e) => SweepRow {
                feature_size: size,
                status: "failed".into(),
                train_accuracy: None,
                train_loss: None,
                test_accuracy: None,
                test_loss: None,
                error: Some(e.to_string()),
            },
        });
    }

    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        command: "sweep".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        model: args.model.clone(),
        feature_source: if csv.is_some() {
            "csv-truncated".into()
        } else {
            "synthetic".into()
        },
        rows,
    };

    println!("feature_size,train_accuracy,train_loss,test_accuracy,test_loss,status");
    for row in &report.rows {
        let fmt = |v: Option<f64>| v.map_or(String::from("-"), |x| format!("{x:.4}"));
        println!(
            "{},{},{},{},{},{}",
            row.feature_size,
            fmt(row.train_accuracy),
            fmt(row.train_loss),
            fmt(row.test_accuracy),
            fmt(row.test_loss),
            row.status
        );
    }

    if let Some(path) = &args.out {
        if path.extension().is_some_and(|e| e == "csv") {
            let mut out = String::from(
                "feature_size,train_accuracy,train_loss,test_accuracy,test_loss,status,error\n",
            );
            for row in &report.rows {
                let fmt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    row.feature_size,
                    fmt(row.train_accuracy),
                    fmt(row.train_loss),
                    fmt(row.test_accuracy),
                    fmt(row.test_loss),
                    row.status,
                    row.error.clone().unwrap_or_default()
                ));
            }
            std::fs::write(path, out)?;
        } else {
            write_json(&report, path)?;
        }
    }

    let failed = report.rows.iter().filter(|r| r.status != "ok").count();
    Ok(if failed == report.rows.len() { 1 } else { 0 })
}

fn cmd_kappa(args: &KappaArgs) -> Result<i32> {
    let file = FileConfig::load(&args.config)?;
    let config_lambdas = file.value("lambdas").and_then(|v| {
        v.as_array().map(|a| {
            a.iter()
                .filter_map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
                .collect::<Vec<f64>>()
        })
    });
    let lambdas = args
        .lambdas
        .clone()
        .or(config_lambdas)
        .unwrap_or_else(|| vec![0.01, 0.1, 1.0]);
    if lambdas.is_empty() {
        return Err(Error::Config("empty lambda list".into()));
    }
    let ds = data::load_csv(&args.data, None)?;
    let k = qkernel::kernel_matrix(&ds.features)?;

    let mut entries = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        if lambda < 0.0 {
            return Err(Error::Config(format!("negative lambda {lambda}")));
        }
        let m = &k + DMatrix::identity(ds.n(), ds.n()) * lambda;
        let entry = match qkernel::spectral_bounds(&m)
            .and_then(|(min, max)| qkernel::condition_number(&m).map(|kappa| (min, max, kappa)))
        {
            Ok((min, max, kappa)) => KappaEntry {
                lambda,
                status: "ok".into(),
                kappa: Some(kappa),
                min_eigenvalue: Some(min),
                max_eigenvalue: Some(max),
                error: None,
            },
            Err(e) => KappaEntry {
                lambda,
                status: "error".into(),
                kappa: None,
                min_eigenvalue: None,
                max_eigenvalue: None,
                error: Some(e.to_string()),
            },
        };
        entries.push(entry);
    }

    for e in &entries {
        match e.status.as_str() {
            "ok" => println!(
                "kappa lambda={}: kappa={:.6} min_eig={:.6e} max_eig={:.6e}",
                e.lambda,
                e.kappa.unwrap(),
                e.min_eigenvalue.unwrap(),
                e.max_eigenvalue.unwrap()
            ),
            _ => println!(
                "kappa lambda={}: error: {}",
                e.lambda,
                e.error.clone().unwrap_or_default()
            ),
        }
    }

    let report = KappaReport {
        schema_version: SCHEMA_VERSION,
        command: "kappa".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        n_samples: ds.n(),
        feature_dim: ds.d,
        entries,
    };
    if let Some(path) = &args.out {
        write_json(&report, path)?;
    }

    let failed = report.entries.iter().filter(|e| e.status != "ok").count();
    Ok(if failed == report.entries.len() { 1 } else { 0 })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::Io(_)
            | Error::Csv { .. }
            | Error::LabelOutOfRange { .. }
            | Error::EmptyDataset
            | Error::EmptySplit(_)
            | Error::BatchTooLarge { .. }
            | Error::TooFewClasses(_)
            | Error::ZeroShots
            | Error::NegativeLambda(_)
    )
}

/// Runs one parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::GenData(args) => cmd_gen_data(args),
        Command::TrainQsvm(args) => cmd_train_qsvm(args),
        Command::TrainVqc(args) => cmd_train_vqc(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Kappa(args) => cmd_kappa(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}
