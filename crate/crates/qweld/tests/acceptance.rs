//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with the measured statistics (run with `--nocapture` to see them
//! for passing tests).

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qweld::data::synth_blobs;
use qweld::optim::DfoConfig;
use qweld::pauli;
use qweld::qkernel;
use qweld::qsvm::{self, Backend, QsvmTrainConfig};
use qweld::sim::{
    apply_circuit, derive_seed, hadamard_test, inner_product, Circuit, Gate, OverlapPart,
    ShotConfig, Statevector,
};
use qweld::vqc;
use qweld::vqls::{self, fidelity, LinearSystem};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::time::Instant;

fn report_line(id: &str, pass: bool, details: &str) {
    println!(
        "acceptance: {id}: {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn random_circuit(rng: &mut ChaCha12Rng, num_qubits: usize, depth: usize) -> Circuit {
    let mut c = Circuit::new(num_qubits);
    for _ in 0..depth {
        let t = rng.random_range(0..num_qubits);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let other = if num_qubits > 1 {
            let mut o = rng.random_range(0..num_qubits);
            while o == t {
                o = rng.random_range(0..num_qubits);
            }
            o
        } else {
            t
        };
        let gate = match rng.random_range(0..8u32) {
            0 => Gate::H { target: t },
            1 => Gate::Ry { target: t, angle },
            2 => Gate::Rz { target: t, angle },
            3 if num_qubits > 1 => Gate::Crz {
                control: other,
                target: t,
                angle,
            },
            4 if num_qubits > 1 => Gate::Cx {
                control: other,
                target: t,
            },
            5 => Gate::X { target: t },
            6 => Gate::Y { target: t },
            _ => Gate::Z { target: t },
        };
        c.push(gate);
    }
    c
}

fn random_pauli_circuit(rng: &mut ChaCha12Rng, num_qubits: usize) -> Circuit {
    let mut c = Circuit::new(num_qubits);
    for q in 0..num_qubits {
        match rng.random_range(0..4u32) {
            0 => {}
            1 => c.push(Gate::X { target: q }),
            2 => c.push(Gate::Y { target: q }),
            _ => c.push(Gate::Z { target: q }),
        }
    }
    c
}

#[test]
fn ac01_simulator_fidelity() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xAC01);
    let mut max_norm_drift: f64 = 0.0;
    let mut max_inverse_err: f64 = 0.0;
    let mut max_ht_err: f64 = 0.0;
    let exact = ShotConfig::exact();

    for _ in 0..1000 {
        let qubits = rng.random_range(1..=6usize);
        let depth = rng.random_range(1..=20usize);
        let circuit = random_circuit(&mut rng, qubits, depth);

        let state = apply_circuit(&Statevector::zero(qubits), &circuit).unwrap();
        max_norm_drift = max_norm_drift.max((state.norm() - 1.0).abs());

        let restored = apply_circuit(&state, &circuit.inverse()).unwrap();
        for (i, amp) in restored.amplitudes().iter().enumerate() {
            let expect = if i == 0 {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            max_inverse_err = max_inverse_err.max((amp - expect).norm());
        }

        let pauli = random_pauli_circuit(&mut rng, qubits);
        let overlap = inner_product(&state, &apply_circuit(&state, &pauli).unwrap()).unwrap();
        let re = hadamard_test(&circuit, &pauli, OverlapPart::Real, &exact).unwrap();
        let im = hadamard_test(&circuit, &pauli, OverlapPart::Imag, &exact).unwrap();
        max_ht_err = max_ht_err
            .max((re - overlap.re).abs())
            .max((im - overlap.im).abs());
    }

    let elapsed = start.elapsed();
    let pass = max_norm_drift < 1e-9
        && max_inverse_err < 1e-9
        && max_ht_err < 1e-12
        && elapsed.as_secs_f64() < 30.0;
    report_line(
        "AC-1 simulator fidelity",
        pass,
        &format!(
            "1000 circuits: norm drift {max_norm_drift:.2e}, inverse error {max_inverse_err:.2e}, \
             Hadamard-test error {max_ht_err:.2e}, {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

#[test]
fn ac02_pauli_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xAC02);
    let mut max_err: f64 = 0.0;
    for dim in [2usize, 4, 8] {
        for _ in 0..100 {
            let a = DMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let m = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
            let d = pauli::decompose(&m, 0.0).unwrap();
            let err = (&pauli::reconstruct(&d) - &m).map(|c| c.norm()).max();
            max_err = max_err.max(err);
        }
    }
    let elapsed = start.elapsed();
    let pass = max_err < 1e-10 && elapsed.as_secs_f64() < 10.0;
    report_line(
        "AC-2 Pauli round trip",
        pass,
        &format!(
            "300 Hermitian matrices (dims 2/4/8): max entry error {max_err:.2e}, {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

// Random SPD system with eigenvalues spanning [1, kappa] and a target b
// chosen so the dense solution is a real product state, i.e. exactly
// representable by the depth-1 ansatz.
fn representable_system(seed: u64, qubits: usize, kappa: f64) -> LinearSystem {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dim = 1usize << qubits;
    let gauss = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let orth = gauss.qr().q();
    let mut eigs: Vec<f64> = (0..dim).map(|_| rng.random_range(1.0..kappa)).collect();
    eigs[0] = 1.0;
    eigs[dim - 1] = kappa;
    let m = &orth * DMatrix::from_diagonal(&DVector::from_vec(eigs)) * orth.transpose();
    let m = (&m + m.transpose()) * 0.5;

    let mut product = vec![1.0f64];
    for _ in 0..qubits {
        let half = rng.random_range(0.0..std::f64::consts::TAU) / 2.0;
        let (c, s) = (half.cos(), half.sin());
        let mut next = Vec::with_capacity(product.len() * 2);
        for &v in &product {
            next.push(v * c);
        }
        for &v in &product {
            next.push(v * s);
        }
        product = next;
    }
    let b_raw = &m * DVector::from_vec(product);
    let b = qkernel::normalize(b_raw.as_slice()).unwrap();
    LinearSystem::new(m, b, 0.0).unwrap()
}

#[test]
fn ac03_vqls_oracle_equivalence() {
    let start = Instant::now();
    let exact = ShotConfig::exact();
    let mut pass = true;
    let mut summary = String::new();

    for qubits in [2usize, 3] {
        let mut converged = 0usize;
        let mut min_fidelity: f64 = 1.0;
        for run in 0..20u64 {
            let kappa = {
                let mut krng = ChaCha12Rng::seed_from_u64(derive_seed(0xAC03, run));
                krng.random_range(2.0..8.0)
            };
            let sys = representable_system(3000 + 100 * qubits as u64 + run, qubits, kappa);
            // The loop refines well past the 0.01 threshold within the
            // same 300-iteration budget; convergence is measured against
            // 0.01 on the trace. Stopping exactly at the threshold would
            // leave the solution error at the fidelity margin.
            let dfo = DfoConfig {
                epsilon: 1e-4,
                max_iters: 300,
                initial_step: 1.0,
                seed: 7000 + run,
            };
            let res = vqls::solve(&sys, 1, &dfo, &exact).unwrap();
            if res.cost_trace.iter().any(|&c| c <= 0.01) {
                converged += 1;
                let dense = sys.dense_solution().unwrap();
                min_fidelity = min_fidelity.min(fidelity(&res.solution_amplitudes, &dense));
            }
        }
        if converged < 16 || min_fidelity < 0.99 {
            pass = false;
        }
        summary.push_str(&format!(
            "q={qubits}: {converged}/20 reached 0.01 in 300 iters, min fidelity {min_fidelity:.4}; "
        ));
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 300.0 {
        pass = false;
    }
    report_line(
        "AC-3 VQLS oracle equivalence",
        pass,
        &format!("{summary}{elapsed:.2?}"),
    );
    assert!(pass);
}

fn qsvm_acceptance_config(backend: Backend, seed: u64) -> QsvmTrainConfig {
    QsvmTrainConfig {
        lambda: 1.0,
        layers: 3,
        dfo: DfoConfig {
            epsilon: 1e-4,
            max_iters: 2000,
            initial_step: 1.0,
            seed,
        },
        shots: ShotConfig::exact(),
        backend,
    }
}

#[test]
fn ac04_qsvm_desk_scale_classification() {
    let start = Instant::now();
    let train = synth_blobs(4, 63, 2, 10.0, 0xA41).unwrap();
    let test = synth_blobs(50, 63, 2, 10.0, 0xA42).unwrap();
    let to_signs = |labels: &[usize]| -> Vec<f64> {
        labels
            .iter()
            .map(|&l| if l == 1 { 1.0 } else { -1.0 })
            .collect()
    };
    let y = to_signs(&train.labels);

    let quantum = qsvm::train_binary(
        &train.features,
        &y,
        &qsvm_acceptance_config(Backend::Quantum, 5),
    )
    .unwrap();
    let classical = qsvm::train_binary(
        &train.features,
        &y,
        &qsvm_acceptance_config(Backend::Classical, 5),
    )
    .unwrap();

    // Classical backend must match the LS-SVM oracle exactly.
    let k = qkernel::kernel_matrix(&train.features).unwrap();
    let (oracle_alphas, oracle_bias) = qsvm::classical_dual_solve(&k, &y, 1.0).unwrap();
    let oracle_exact = classical.alphas == oracle_alphas && classical.bias == oracle_bias;

    let mut correct = 0usize;
    let mut agree = 0usize;
    for (x, &label) in test.features.iter().zip(&test.labels) {
        let fq = qsvm::decision(&quantum, x).unwrap();
        let fc = qsvm::decision(&classical, x).unwrap();
        if usize::from(fq > 0.0) == label {
            correct += 1;
        }
        if (fq > 0.0) == (fc > 0.0) {
            agree += 1;
        }
    }
    let accuracy = correct as f64 / test.n() as f64;
    let agreement = agree as f64 / test.n() as f64;
    let diag = quantum.vqls.as_ref().unwrap();

    let elapsed = start.elapsed();
    let pass = accuracy >= 0.90
        && agreement >= 0.95
        && quantum.train_sign_agreement >= 0.95
        && oracle_exact
        && elapsed.as_secs_f64() < 600.0;
    report_line(
        "AC-4 QSVM desk-scale classification",
        pass,
        &format!(
            "test accuracy {accuracy:.3}, test sign agreement {agreement:.3}, train sign \
             agreement {:.3}, solver fidelity {:.4}, classical==oracle {oracle_exact}, {elapsed:.2?}",
            quantum.train_sign_agreement, diag.fidelity
        ),
    );
    assert!(pass);
}

#[test]
fn ac05_vqc_desk_scale_classification() {
    let start = Instant::now();
    let cfg = vqc::TrainConfig {
        epochs: 50,
        batch_size: 16,
        learning_rate: 0.01,
        seed: 0xA50,
        gradient_mode: vqc::GradientMode::ParameterShift,
    };

    let train2 = synth_blobs(32, 63, 2, 10.0, 0xA51).unwrap();
    let test2 = synth_blobs(100, 63, 2, 10.0, 0xA52).unwrap();
    let (model2, _) = vqc::train(&train2.features, &train2.labels, &cfg).unwrap();
    let eval2 = vqc::evaluate(&model2, &test2.features, &test2.labels).unwrap();

    let train3 = synth_blobs(32, 63, 3, 10.0, 0xA53).unwrap();
    let test3 = synth_blobs(67, 63, 3, 10.0, 0xA54).unwrap();
    let (model3, _) = vqc::train(&train3.features, &train3.labels, &cfg).unwrap();
    let eval3 = vqc::evaluate(&model3, &test3.features, &test3.labels).unwrap();

    let elapsed = start.elapsed();
    let pass = eval2.metrics.accuracy >= 0.95
        && eval3.metrics.accuracy >= 0.90
        && elapsed.as_secs_f64() < 300.0;
    report_line(
        "AC-5 VQC desk-scale classification",
        pass,
        &format!(
            "binary test accuracy {:.3} (64 train/200 test), 3-class {:.3} (96 train/201 test), {elapsed:.2?}",
            eval2.metrics.accuracy, eval3.metrics.accuracy
        ),
    );
    assert!(pass);
}

#[test]
fn ac06_gradient_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xAC06);
    let mut max_dev: f64 = 0.0;
    for trial in 0..50u64 {
        let d = rng.random_range(3..=8usize);
        let classes = rng.random_range(2..=3usize);
        let model = vqc::VqcModel::init(d, classes, 600 + trial);
        let batch: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let labels: Vec<usize> = (0..3).map(|i| i % classes).collect();
        let grad =
            vqc::gradients(&model, &batch, &labels, vqc::GradientMode::ParameterShift).unwrap();

        let loss = |m: &vqc::VqcModel| -> f64 {
            let probs: Vec<Vec<f64>> = batch.iter().map(|x| vqc::forward(m, x).unwrap()).collect();
            qweld::data::cross_entropy(&probs, &labels).unwrap()
        };
        let h = 1e-5;
        for i in 0..4 {
            let mut plus = model.clone();
            plus.theta[i] += h;
            let mut minus = model.clone();
            minus.theta[i] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            max_dev = max_dev.max((grad.theta[i] - fd).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = max_dev < 1e-6 && elapsed.as_secs_f64() < 60.0;
    report_line(
        "AC-6 gradient correctness",
        pass,
        &format!("50 configurations: max |shift − finite difference| {max_dev:.2e}, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn ac07_shot_noise_behavior() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xAC07);
    let shot_levels = [100u64, 1600, 10_000];
    let mut abs_errors = [0.0f64; 3];
    let mut within_bound = 0usize;

    for instance in 0..100u64 {
        let prep = random_circuit(&mut rng, 3, 12);
        let pauli = random_pauli_circuit(&mut rng, 3);
        let part = if instance % 2 == 0 {
            OverlapPart::Real
        } else {
            OverlapPart::Imag
        };
        let exact = hadamard_test(&prep, &pauli, part, &ShotConfig::exact()).unwrap();
        for (level, total) in shot_levels.iter().zip(abs_errors.iter_mut()) {
            let cfg = ShotConfig::sampled(*level, derive_seed(0xAC07, instance * 10 + level));
            let estimate = hadamard_test(&prep, &pauli, part, &cfg).unwrap();
            let err = (estimate - exact).abs();
            *total += err;
            if *level == 10_000 && err < 0.03 {
                within_bound += 1;
            }
        }
    }
    let mean: Vec<f64> = abs_errors.iter().map(|t| t / 100.0).collect();
    // 1/sqrt(shots) scaling between levels, within a factor of two.
    let mut scaling_ok = true;
    for (i, j) in [(0usize, 1usize), (1, 2), (0, 2)] {
        let expected = (shot_levels[j] as f64 / shot_levels[i] as f64).sqrt();
        let observed = mean[i] / mean[j];
        if observed < expected / 2.0 || observed > expected * 2.0 {
            scaling_ok = false;
        }
    }

    let elapsed = start.elapsed();
    let pass = within_bound >= 99 && scaling_ok && elapsed.as_secs_f64() < 120.0;
    report_line(
        "AC-7 shot-noise behavior",
        pass,
        &format!(
            "10k-shot errors < 0.03 on {within_bound}/100; mean |err| at 100/1600/10000 shots = \
             {:.4}/{:.4}/{:.4}; {elapsed:.2?}",
            mean[0], mean[1], mean[2]
        ),
    );
    assert!(pass);
}

// SPD system with eigenvalues spanning [1, kappa] and a generic unit b, so
// the dense solution picks up amplified low-eigendirection components and
// the cost tolerance tightens with conditioning — the regime where harder
// systems genuinely take longer.
fn generic_system(seed: u64, qubits: usize, kappa: f64) -> LinearSystem {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dim = 1usize << qubits;
    let gauss = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let orth = gauss.qr().q();
    let mut eigs: Vec<f64> = (0..dim).map(|_| rng.random_range(1.0..kappa)).collect();
    eigs[0] = 1.0;
    eigs[dim - 1] = kappa;
    let m = &orth * DMatrix::from_diagonal(&DVector::from_vec(eigs)) * orth.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b = qkernel::normalize(&raw).unwrap();
    LinearSystem::new(m, b, 0.0).unwrap()
}

#[test]
fn ac08_condition_number_trend() {
    let start = Instant::now();
    let exact = ShotConfig::exact();
    let mut medians = Vec::new();
    for kappa in [2.0f64, 10.0, 50.0] {
        let mut iteration_counts: Vec<usize> = Vec::new();
        for run in 0..10u64 {
            let sys = generic_system(9000 + (kappa as u64) * 100 + run, 2, kappa);
            let dfo = DfoConfig {
                epsilon: 0.01,
                max_iters: 300,
                initial_step: 1.0,
                seed: 880 + run,
            };
            let res = vqls::solve(&sys, 2, &dfo, &exact).unwrap();
            // Runs that never reach the threshold count as the cap.
            let iters = res
                .cost_trace
                .iter()
                .position(|&c| c <= 0.01)
                .map(|i| i + 1)
                .unwrap_or(300);
            iteration_counts.push(iters);
        }
        iteration_counts.sort_unstable();
        let median = (iteration_counts[4] + iteration_counts[5]) as f64 / 2.0;
        medians.push(median);
    }

    let elapsed = start.elapsed();
    let pass =
        medians[0] <= medians[1] && medians[1] <= medians[2] && elapsed.as_secs_f64() < 600.0;
    report_line(
        "AC-8 condition-number trend",
        pass,
        &format!(
            "median iterations to 0.01 at kappa 2/10/50 = {:.1}/{:.1}/{:.1}, {elapsed:.2?}",
            medians[0], medians[1], medians[2]
        ),
    );
    assert!(pass);
}

#[test]
fn ac09_multiclass_plumbing() {
    let start = Instant::now();
    let train = synth_blobs(2, 15, 3, 10.0, 0xA91).unwrap();
    let test = synth_blobs(40, 15, 3, 10.0, 0xA92).unwrap();
    let ovr = qsvm::train_ovr(
        &train.features,
        &train.labels,
        &qsvm_acceptance_config(Backend::Quantum, 9),
    )
    .unwrap();
    let predictions: Vec<usize> = test
        .features
        .iter()
        .map(|x| qsvm::predict_ovr(&ovr, x).unwrap())
        .collect();
    let metrics = qweld::data::metrics(&predictions, &test.labels, 3).unwrap();

    // Hand-built tie case: identical flat binaries must pick class 0.
    let flat = qsvm::QsvmModel {
        support_vectors: vec![vec![1.0, 0.0]],
        alphas: vec![0.0],
        bias: 0.25,
        lambda: 0.1,
        dim: 2,
        backend: Backend::Classical,
        kappa: 1.0,
        train_sign_agreement: 1.0,
        vqls: None,
    };
    let tie_model = qsvm::OvrModel {
        classes: vec![0, 1, 2],
        binaries: vec![flat.clone(), flat.clone(), flat],
    };
    let tie_ok = qsvm::predict_ovr(&tie_model, &[0.4, 0.3]).unwrap() == 0;

    // Hand-built confusion placement: single error lands at [true][pred].
    let hand = qweld::data::metrics(&[0, 2, 1], &[0, 1, 1], 3).unwrap();
    let confusion_ok = hand.confusion[1][2] == 1
        && hand.confusion[1][1] == 1
        && hand.confusion[0][0] == 1
        && (hand.accuracy - 2.0 / 3.0).abs() < 1e-12;

    let elapsed = start.elapsed();
    let pass = metrics.accuracy >= 0.85 && tie_ok && confusion_ok && elapsed.as_secs_f64() < 600.0;
    report_line(
        "AC-9 multiclass plumbing",
        pass,
        &format!(
            "3-class OvR quantum accuracy {:.3} on 120 test points, tie-break {}, confusion \
             placement {}, {elapsed:.2?}",
            metrics.accuracy, tie_ok, confusion_ok
        ),
    );
    assert!(pass);
}

#[test]
fn ac10_cli_reproducibility() {
    let start = Instant::now();
    let dir_a = scratch_dir("ac10-a");
    let dir_b = scratch_dir("ac10-b");

    let command_sets: Vec<Vec<&str>> = vec![
        vec![
            "gen-data",
            "--classes",
            "2",
            "--per-class",
            "10",
            "--dim",
            "7",
            "--seed",
            "21",
            "--out",
            "d.csv",
        ],
        vec![
            "train-qsvm",
            "--data",
            "d.csv",
            "--train-fraction",
            "0.5",
            "--layers",
            "1",
            "--max-iters",
            "40",
            "--seed",
            "4",
            "--out",
            "qsvm",
        ],
        vec![
            "train-qsvm",
            "--data",
            "d.csv",
            "--train-fraction",
            "0.5",
            "--sampled",
            "--shots",
            "200",
            "--layers",
            "1",
            "--max-iters",
            "10",
            "--seed",
            "4",
            "--out",
            "qsvm_sampled",
        ],
        vec![
            "train-vqc",
            "--data",
            "d.csv",
            "--train-fraction",
            "0.5",
            "--epochs",
            "2",
            "--batch-size",
            "4",
            "--seed",
            "4",
            "--out",
            "vqc",
        ],
        vec![
            "sweep",
            "--model",
            "vqc",
            "--sizes",
            "7,15",
            "--classes",
            "2",
            "--per-class",
            "6",
            "--epochs",
            "2",
            "--batch-size",
            "4",
            "--seed",
            "6",
            "--out",
            "sweep.json",
        ],
        vec!["kappa", "--data", "d.csv", "--out", "kappa.json"],
    ];

    let mut pass = true;
    let mut compared = 0usize;
    // The two passes run with different worker caps; outputs must not
    // depend on thread count.
    for (dir, threads) in [(&dir_a, "2"), (&dir_b, "1")] {
        for args in &command_sets {
            let res = run_qweld_env(dir, args, &[("QWELD_THREADS", threads)]);
            // Exit 1 marks degraded-but-completed training (the sampled
            // low-iteration run); outputs are still written and must match.
            if res.code != 0 && res.code != 1 {
                panic!("command {args:?} failed in {dir:?}: {}", res.stderr);
            }
        }
    }
    for name in [
        "d.csv",
        "qsvm.model.json",
        "qsvm.report.json",
        "qsvm_sampled.model.json",
        "qsvm_sampled.report.json",
        "vqc.model.json",
        "vqc.report.json",
        "sweep.json",
        "kappa.json",
    ] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        if a != b {
            pass = false;
            println!("acceptance: AC-10 mismatch in {name}");
        }
        compared += 1;
    }

    let elapsed = start.elapsed();
    report_line(
        "AC-10 reproducibility",
        pass,
        &format!("{compared} output files byte-identical across reruns, {elapsed:.2?}"),
    );
    assert!(pass);
}
