//! End-to-end tests of the `qweld` command-line interface.

mod common;

use common::*;
use qweld::data;
use qweld::qsvm;
use serde_json::Value;

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn gen_data_writes_expected_rows_and_is_reproducible() {
    let dir = scratch_dir("gen-data");
    let args = [
        "gen-data",
        "--classes",
        "3",
        "--per-class",
        "40",
        "--dim",
        "63",
        "--seed",
        "7",
        "--out",
        "d.csv",
    ];
    let res = run_qweld(&dir, &args);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let contents = std::fs::read(dir.join("d.csv")).unwrap();
    assert_eq!(
        contents.iter().filter(|&&b| b == b'\n').count(),
        121,
        "header + 120 rows"
    );

    let first = contents.clone();
    let res = run_qweld(&dir, &args);
    assert_eq!(res.code, 0);
    assert_eq!(first, std::fs::read(dir.join("d.csv")).unwrap());
}

#[test]
fn gen_data_rejects_zero_dim() {
    let dir = scratch_dir("gen-data-bad");
    let res = run_qweld(&dir, &["gen-data", "--dim", "0", "--out", "d.csv"]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
    assert!(!res.stderr.is_empty());
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = scratch_dir("usage");
    let res = run_qweld(&dir, &["frobnicate"]);
    assert_eq!(res.code, 2);
}

#[test]
fn train_qsvm_classical_backend_matches_oracle() {
    let dir = scratch_dir("qsvm-classical");
    run_qweld(
        &dir,
        &[
            "gen-data",
            "--classes",
            "2",
            "--per-class",
            "4",
            "--dim",
            "15",
            "--seed",
            "11",
            "--out",
            "d.csv",
        ],
    );
    let res = run_qweld(
        &dir,
        &[
            "train-qsvm",
            "--data",
            "d.csv",
            "--backend",
            "classical",
            "--lambda",
            "0.5",
            "--seed",
            "3",
            "--out",
            "run",
        ],
    );
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert_valid_report(
        &dir.join("run.report.json"),
        "report-train-qsvm.schema.json",
    );

    let report = read_json(&dir.join("run.report.json"));
    assert_eq!(report["config"]["backend"], "classical");

    // Oracle: the same LS-SVM solved directly through the library.
    let ds = data::load_csv(&dir.join("d.csv"), None).unwrap();
    let y: Vec<f64> = ds
        .labels
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect();
    let k = qweld::qkernel::kernel_matrix(&ds.features).unwrap();
    let (alphas, bias) = qsvm::classical_dual_solve(&k, &y, 0.5).unwrap();
    let correct = ds
        .features
        .iter()
        .zip(&ds.labels)
        .filter(|(x, &l)| {
            let f: f64 = alphas
                .iter()
                .zip(&ds.features)
                .map(|(a, sv)| a * qweld::qkernel::kernel_entry(sv, x).unwrap())
                .sum::<f64>()
                + bias;
            usize::from(f > 0.0) == l
        })
        .count();
    let oracle_accuracy = correct as f64 / ds.n() as f64;
    assert_eq!(
        report["train"]["accuracy"].as_f64().unwrap(),
        oracle_accuracy
    );

    // Model file carries the oracle coefficients exactly.
    let model = read_json(&dir.join("run.model.json"));
    assert_eq!(model["mode"], "binary");
    let file_alphas: Vec<f64> = model["binaries"][0]["alphas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(file_alphas, alphas);
}

#[test]
fn train_qsvm_missing_file_is_usage_error() {
    let dir = scratch_dir("qsvm-missing");
    let res = run_qweld(&dir, &["train-qsvm", "--data", "nope.csv"]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
}

#[test]
fn train_vqc_zero_epochs_writes_empty_history() {
    let dir = scratch_dir("vqc-zero");
    run_qweld(
        &dir,
        &[
            "gen-data",
            "--classes",
            "2",
            "--per-class",
            "8",
            "--dim",
            "7",
            "--seed",
            "5",
            "--out",
            "d.csv",
        ],
    );
    let res = run_qweld(
        &dir,
        &[
            "train-vqc",
            "--data",
            "d.csv",
            "--epochs",
            "0",
            "--batch-size",
            "8",
            "--out",
            "run",
        ],
    );
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert_valid_report(&dir.join("run.report.json"), "report-train-vqc.schema.json");
    let report = read_json(&dir.join("run.report.json"));
    assert_eq!(report["history"].as_array().unwrap().len(), 0);
}

#[test]
fn train_vqc_three_class_confusion_shape() {
    let dir = scratch_dir("vqc-3class");
    run_qweld(
        &dir,
        &[
            "gen-data",
            "--classes",
            "3",
            "--per-class",
            "6",
            "--dim",
            "7",
            "--seed",
            "5",
            "--out",
            "d.csv",
        ],
    );
    let res = run_qweld(
        &dir,
        &[
            "train-vqc",
            "--data",
            "d.csv",
            "--epochs",
            "2",
            "--batch-size",
            "6",
            "--out",
            "run",
        ],
    );
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let report = read_json(&dir.join("run.report.json"));
    let confusion = report["train"]["confusion"].as_array().unwrap();
    assert_eq!(confusion.len(), 3);
    for row in confusion {
        assert_eq!(row.as_array().unwrap().len(), 3);
    }
}

#[test]
fn sweep_writes_table_and_is_deterministic() {
    let dir = scratch_dir("sweep");
    let args = [
        "sweep",
        "--model",
        "vqc",
        "--sizes",
        "7,63",
        "--classes",
        "2",
        "--per-class",
        "8",
        "--epochs",
        "2",
        "--batch-size",
        "4",
        "--seed",
        "9",
        "--out",
        "sweep.json",
    ];
    let res = run_qweld(&dir, &args);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert_valid_report(&dir.join("sweep.json"), "report-sweep.schema.json");
    let report = read_json(&dir.join("sweep.json"));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["feature_size"], 7);
    assert_eq!(rows[1]["feature_size"], 63);
    for row in rows {
        assert_eq!(row["status"], "ok");
        assert!(row["train_accuracy"].as_f64().is_some());
        assert!(row["test_loss"].as_f64().is_some());
    }

    let bytes = std::fs::read(dir.join("sweep.json")).unwrap();
    let res = run_qweld(&dir, &args);
    assert_eq!(res.code, 0);
    assert_eq!(bytes, std::fs::read(dir.join("sweep.json")).unwrap());
}

#[test]
fn sweep_rejects_empty_sizes_and_unknown_model() {
    let dir = scratch_dir("sweep-bad");
    let res = run_qweld(&dir, &["sweep", "--model", "vqc", "--sizes", ""]);
    assert_eq!(res.code, 2);
    let res = run_qweld(&dir, &["sweep", "--model", "nope"]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
}

#[test]
fn sweep_marks_failed_cells_and_continues() {
    let dir = scratch_dir("sweep-fail");
    // One sample per class cannot be split, so every cell fails; the run
    // still completes with per-cell error entries and exits 1.
    let res = run_qweld(
        &dir,
        &[
            "sweep",
            "--model",
            "vqc",
            "--sizes",
            "7,15",
            "--classes",
            "2",
            "--per-class",
            "1",
            "--out",
            "sweep.json",
        ],
    );
    assert_eq!(res.code, 1, "stderr: {}", res.stderr);
    let report = read_json(&dir.join("sweep.json"));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row["status"], "failed");
        assert!(row["error"].as_str().is_some());
    }
}

#[test]
fn kappa_identity_dataset_and_monotonicity() {
    let dir = scratch_dir("kappa");
    // Orthogonal features give K = I, so kappa = 1 at lambda = 0.
    std::fs::write(
        dir.join("ortho.csv"),
        "f0,f1,f2,f3,label\n1,0,0,0,0\n0,1,0,0,1\n0,0,1,0,0\n0,0,0,1,1\n",
    )
    .unwrap();
    let res = run_qweld(
        &dir,
        &[
            "kappa",
            "--data",
            "ortho.csv",
            "--lambdas",
            "0",
            "--out",
            "kappa.json",
        ],
    );
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert_valid_report(&dir.join("kappa.json"), "report-kappa.schema.json");
    let report = read_json(&dir.join("kappa.json"));
    let kappa = report["entries"][0]["kappa"].as_f64().unwrap();
    assert!((kappa - 1.0).abs() < 1e-9);

    // Regularization monotonicity on a generic dataset.
    run_qweld(
        &dir,
        &[
            "gen-data",
            "--classes",
            "2",
            "--per-class",
            "5",
            "--dim",
            "8",
            "--seed",
            "3",
            "--out",
            "d.csv",
        ],
    );
    let res = run_qweld(
        &dir,
        &[
            "kappa",
            "--data",
            "d.csv",
            "--lambdas",
            "0.01,0.1,1",
            "--out",
            "mono.json",
        ],
    );
    assert_eq!(res.code, 0);
    let report = read_json(&dir.join("mono.json"));
    let kappas: Vec<f64> = report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kappa"].as_f64().unwrap())
        .collect();
    assert!(
        kappas[0] >= kappas[1] && kappas[1] >= kappas[2],
        "{kappas:?}"
    );
}

#[test]
fn kappa_reports_singular_kernel() {
    let dir = scratch_dir("kappa-singular");
    // Duplicate samples make K singular at lambda = 0.
    std::fs::write(dir.join("dup.csv"), "f0,f1,label\n1,2,0\n1,2,1\n0,1,1\n").unwrap();
    let res = run_qweld(&dir, &["kappa", "--data", "dup.csv", "--lambdas", "0"]);
    assert_eq!(res.code, 1, "stderr: {}", res.stderr);
    assert!(res.stdout.contains("error"), "stdout: {}", res.stdout);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = scratch_dir("config");
    std::fs::write(
        dir.join("qweld.toml"),
        "classes = 3\nper-class = 2\ndim = 7\nseed = 4\n",
    )
    .unwrap();
    let res = run_qweld(
        &dir,
        &[
            "gen-data",
            "--config",
            "qweld.toml",
            "--per-class",
            "5",
            "--out",
            "d.csv",
        ],
    );
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let ds = data::load_csv(&dir.join("d.csv"), None).unwrap();
    assert_eq!(ds.num_classes(), 3); // from config
    assert_eq!(ds.n(), 15); // per-class overridden by flag
    assert_eq!(ds.d, 7);
}

#[test]
fn qsvm_model_file_round_trips_through_loader() {
    let dir = scratch_dir("qsvm-model-load");
    run_qweld(
        &dir,
        &[
            "gen-data",
            "--classes",
            "3",
            "--per-class",
            "3",
            "--dim",
            "8",
            "--seed",
            "13",
            "--out",
            "d.csv",
        ],
    );
    let res = run_qweld(
        &dir,
        &[
            "train-qsvm",
            "--data",
            "d.csv",
            "--backend",
            "classical",
            "--out",
            "run",
        ],
    );
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let file = qweld::report::load_qsvm_model(&dir.join("run.model.json")).unwrap();
    assert_eq!(file.mode, "ovr");
    assert_eq!(file.classes.len(), 3);
    assert_eq!(file.binaries.len(), 3);
    assert_eq!(file.support_vectors.len(), 9);
}
