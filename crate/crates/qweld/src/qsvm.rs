//! The kernel classifier built on the variational solver: classical
//! least-squares SVM reference solve, amplitude rescaling of the quantum
//! solution, the kernel decision function and one-vs-rest multiclass.
//!
//! The dual problem is the least-squares SVM bordered system
//!   [[0, 1ᵀ], [1, K + λI]] · (bias, α) = (0, y),
//! the only SVM form whose coefficients come from one linear system and can
//! therefore be produced by the variational solver. The quantum path solves
//! the unbordered (K + λI)·α = y/‖y‖ system variationally, rescales the
//! read-out amplitudes against the classical α by an affine least-squares
//! fit, and takes the bias from the classical solve.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optim::DfoConfig;
use crate::qkernel::{condition_number, kernel_entry, kernel_matrix};
use crate::sim::{derive_seed, ShotConfig};
use crate::vqls::{self, build_system, fidelity};

/// Which solver produces the dual coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Variational solve of the kernel system, rescaled against the
    /// classical reference.
    Quantum,
    /// Classical least-squares solve only (the oracle baseline).
    Classical,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Quantum => "quantum",
            Backend::Classical => "classical",
        }
    }
}

/// Training knobs shared by the binary and one-vs-rest paths.
#[derive(Debug, Clone)]
pub struct QsvmTrainConfig {
    pub lambda: f64,
    pub layers: usize,
    pub dfo: DfoConfig,
    pub shots: ShotConfig,
    pub backend: Backend,
}

impl Default for QsvmTrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            layers: 1,
            dfo: DfoConfig::default(),
            shots: ShotConfig::exact(),
            backend: Backend::Quantum,
        }
    }
}

/// Solver diagnostics carried by quantum-backend models.
#[derive(Debug, Clone)]
pub struct VqlsDiagnostics {
    pub iterations: usize,
    pub final_cost: Option<f64>,
    pub converged: bool,
    /// Squared overlap between the read-out solution and the dense solution
    /// of the same padded system.
    pub fidelity: f64,
    pub rescale_scale: f64,
    pub rescale_offset: f64,
    /// Set when the solution fidelity fell below 0.9; the model is still
    /// returned for inspection.
    pub degraded: bool,
}

/// Binary kernel classifier f(x) = Σ αᵢ K(xᵢ, x) + bias. All training
/// points are retained (the least-squares dual is non-sparse).
#[derive(Debug, Clone)]
pub struct QsvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub dim: usize,
    pub backend: Backend,
    /// Condition number of K + λI.
    pub kappa: f64,
    /// Fraction of training points whose decision sign matches the
    /// classical-backend decision sign.
    pub train_sign_agreement: f64,
    pub vqls: Option<VqlsDiagnostics>,
}

/// Solves the bordered least-squares SVM system by dense factorization and
/// returns (alphas, bias).
pub fn classical_dual_solve(k: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<(Vec<f64>, f64)> {
    let n = k.nrows();
    if k.ncols() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            left: k.ncols(),
            right: y.len(),
        });
    }
    if lambda <= 0.0 {
        return Err(Error::NegativeLambda(lambda));
    }
    let mut system = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        system[(0, i + 1)] = 1.0;
        system[(i + 1, 0)] = 1.0;
        for j in 0..n {
            system[(i + 1, j + 1)] = k[(i, j)] + if i == j { lambda } else { 0.0 };
        }
    }
    let mut rhs = DVector::zeros(n + 1);
    for (i, &yi) in y.iter().enumerate() {
        rhs[i + 1] = yi;
    }
    let solution = system
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("bordered LS-SVM system".into()))?;
    let residual = (&system * &solution - &rhs).norm();
    if residual >= 1e-8 {
        return Err(Error::SingularSystem(format!(
            "LS-SVM solve residual {residual:.3e}"
        )));
    }
    let bias = solution[0];
    let alphas = solution.as_slice()[1..].to_vec();
    Ok((alphas, bias))
}

/// Fits reference ≈ scale·amplitudes + offset by least squares and returns
/// (mapped alphas, scale, offset).
pub fn rescale_solution(amplitudes: &[f64], reference: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    if amplitudes.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            left: amplitudes.len(),
            right: reference.len(),
        });
    }
    let n = amplitudes.len() as f64;
    let mean_a: f64 = amplitudes.iter().sum::<f64>() / n;
    let mean_r: f64 = reference.iter().sum::<f64>() / n;
    let var_a: f64 = amplitudes.iter().map(|a| (a - mean_a).powi(2)).sum::<f64>();
    if var_a <= 1e-24 {
        return Err(Error::ZeroVariance);
    }
    let cov: f64 = amplitudes
        .iter()
        .zip(reference)
        .map(|(a, r)| (a - mean_a) * (r - mean_r))
        .sum();
    let scale = cov / var_a;
    let offset = mean_r - scale * mean_a;
    let mapped = amplitudes.iter().map(|a| scale * a + offset).collect();
    Ok((mapped, scale, offset))
}

fn check_binary_labels(y: &[f64]) -> Result<()> {
    let pos = y.iter().filter(|&&v| v > 0.0).count();
    if y.len() < 2 || pos == 0 || pos == y.len() {
        return Err(Error::TooFewClasses(1));
    }
    Ok(())
}

fn training_decisions(k: &DMatrix<f64>, alphas: &[f64], bias: f64) -> Vec<f64> {
    (0..k.nrows())
        .map(|i| {
            alphas
                .iter()
                .enumerate()
                .map(|(j, a)| a * k[(j, i)])
                .sum::<f64>()
                + bias
        })
        .collect()
}

/// Trains one binary classifier on ±1 labels.
pub fn train_binary(x: &[Vec<f64>], y: &[f64], cfg: &QsvmTrainConfig) -> Result<QsvmModel> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    check_binary_labels(y)?;

    let k = kernel_matrix(x)?;
    let n = x.len();
    let regularized = &k + DMatrix::identity(n, n) * cfg.lambda;
    let kappa = condition_number(&regularized)?;
    let (ref_alphas, bias) = classical_dual_solve(&k, y, cfg.lambda)?;
    let reference = training_decisions(&k, &ref_alphas, bias);

    let (alphas, vqls_diag) = match cfg.backend {
        Backend::Classical => (ref_alphas.clone(), None),
        Backend::Quantum => {
            let sys = build_system(&k, y, cfg.lambda)?;
            let res = vqls::solve(&sys, cfg.layers, &cfg.dfo, &cfg.shots)?;
            let dense = sys.dense_solution()?;
            let fid = fidelity(&res.solution_amplitudes, &dense);
            let truncated = &res.solution_amplitudes[..n];
            let (alphas, scale, offset) = rescale_solution(truncated, &ref_alphas)?;
            let diag = VqlsDiagnostics {
                iterations: res.iterations,
                final_cost: res.final_cost,
                converged: res.converged,
                fidelity: fid,
                rescale_scale: scale,
                rescale_offset: offset,
                degraded: fid < 0.9,
            };
            (alphas, Some(diag))
        }
    };

    let decisions = training_decisions(&k, &alphas, bias);
    let agree = decisions
        .iter()
        .zip(&reference)
        .filter(|(a, b)| (**a > 0.0) == (**b > 0.0))
        .count();
    Ok(QsvmModel {
        support_vectors: x.to_vec(),
        alphas,
        bias,
        lambda: cfg.lambda,
        dim: x[0].len(),
        backend: cfg.backend,
        kappa,
        train_sign_agreement: agree as f64 / n as f64,
        vqls: vqls_diag,
    })
}

/// Σ αᵢ·K(xᵢ, x) + bias with the quantum kernel of the training encoding.
pub fn decision(model: &QsvmModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.dim {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: model.dim,
        });
    }
    let mut f = model.bias;
    for (sv, alpha) in model.support_vectors.iter().zip(&model.alphas) {
        f += alpha * kernel_entry(sv, x)?;
    }
    Ok(f)
}

/// One binary model per class, argmax prediction.
#[derive(Debug, Clone)]
pub struct OvrModel {
    /// Class indices in training order; prediction returns one of these.
    pub classes: Vec<usize>,
    pub binaries: Vec<QsvmModel>,
}

/// Trains one one-vs-rest binary per class (target +1, rest −1). Classes
/// are the sorted distinct labels; each needs at least one sample.
pub fn train_ovr(x: &[Vec<f64>], labels: &[usize], cfg: &QsvmTrainConfig) -> Result<OvrModel> {
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: labels.len(),
        });
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }

    let binaries: Vec<QsvmModel> = classes
        .par_iter()
        .enumerate()
        .map(|(idx, &c)| {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == c { 1.0 } else { -1.0 })
                .collect();
            let mut class_cfg = cfg.clone();
            class_cfg.dfo.seed = derive_seed(cfg.dfo.seed, idx as u64);
            class_cfg.shots = cfg.shots.with_seed(derive_seed(cfg.shots.seed, idx as u64));
            train_binary(x, &y, &class_cfg)
        })
        .collect::<Result<_>>()?;
    Ok(OvrModel { classes, binaries })
}

/// Per-class decision values in `classes` order.
pub fn decision_values(model: &OvrModel, x: &[f64]) -> Result<Vec<f64>> {
    model.binaries.iter().map(|m| decision(m, x)).collect()
}

/// The class whose binary reports the highest decision value; ties break
/// toward the lowest class index.
pub fn predict_ovr(model: &OvrModel, x: &[f64]) -> Result<usize> {
    let values = decision_values(model, x)?;
    Ok(model.classes[crate::data::argmax(&values)])
}
