//! Variational-circuit classifier: a linear reduction to 4 features, H+RY
//! angle embedding on 4 qubits, one trainable RY layer with a CX chain,
//! Pauli-Z readout and a linear-softmax head, trained end to end with Adam.
//! Circuit-angle gradients use the parameter-shift rule; the classical
//! layers are differentiated analytically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::data::{argmax, cross_entropy, metrics, softmax, Metrics};
use crate::error::{Error, Result};
use crate::optim::{AdamConfig, AdamState};
use crate::sim::{apply_circuit, derive_seed, expectation_z, Circuit, Statevector};

/// Qubit count fixed by the best configuration of the tuning study.
pub const NUM_QUBITS: usize = 4;

/// Full parameter set of the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcModel {
    /// 4×d reduction weights, row-major.
    pub w_in: Vec<Vec<f64>>,
    pub b_in: Vec<f64>,
    /// One RY angle per qubit.
    pub theta: Vec<f64>,
    /// C×4 head weights, row-major.
    pub w_out: Vec<Vec<f64>>,
    pub b_out: Vec<f64>,
    pub num_classes: usize,
    pub dim: usize,
}

/// Gradient of the mean cross-entropy, same shape as the model.
#[derive(Debug, Clone)]
pub struct VqcGradients {
    pub w_in: Vec<Vec<f64>>,
    pub b_in: Vec<f64>,
    pub theta: Vec<f64>,
    pub w_out: Vec<Vec<f64>>,
    pub b_out: Vec<f64>,
}

/// How circuit-angle derivatives are obtained during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    ParameterShift,
    /// Central finite differences on the circuit outputs; a debugging mode
    /// for cross-checking the shift rule.
    FiniteDifferenceCheck,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub gradient_mode: GradientMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 16,
            learning_rate: 0.01,
            seed: 42,
            gradient_mode: GradientMode::ParameterShift,
        }
    }
}

/// Per-epoch training-set loss and accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

impl VqcModel {
    /// Seeded initialization: θ uniform in [0, π); weight and bias layers
    /// uniform in a symmetric range scaled by their input dimension.
    pub fn init(dim: usize, num_classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a_in = 1.0 / (dim as f64).sqrt();
        let w_in = (0..NUM_QUBITS)
            .map(|_| (0..dim).map(|_| rng.random_range(-a_in..a_in)).collect())
            .collect();
        let b_in = (0..NUM_QUBITS)
            .map(|_| rng.random_range(-a_in..a_in))
            .collect();
        let theta = (0..NUM_QUBITS)
            .map(|_| rng.random_range(0.0..std::f64::consts::PI))
            .collect();
        let a_out = 1.0 / (NUM_QUBITS as f64).sqrt();
        let w_out = (0..num_classes)
            .map(|_| {
                (0..NUM_QUBITS)
                    .map(|_| rng.random_range(-a_out..a_out))
                    .collect()
            })
            .collect();
        let b_out = (0..num_classes)
            .map(|_| rng.random_range(-a_out..a_out))
            .collect();
        Self {
            w_in,
            b_in,
            theta,
            w_out,
            b_out,
            num_classes,
            dim,
        }
    }

    fn param_count(&self) -> usize {
        NUM_QUBITS * self.dim
            + NUM_QUBITS
            + NUM_QUBITS
            + self.num_classes * NUM_QUBITS
            + self.num_classes
    }

    fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        for row in &self.w_in {
            v.extend_from_slice(row);
        }
        v.extend_from_slice(&self.b_in);
        v.extend_from_slice(&self.theta);
        for row in &self.w_out {
            v.extend_from_slice(row);
        }
        v.extend_from_slice(&self.b_out);
        v
    }

    fn unflatten(&mut self, v: &[f64]) {
        let mut it = v.iter();
        for row in &mut self.w_in {
            for w in row.iter_mut() {
                *w = *it.next().unwrap();
            }
        }
        for b in &mut self.b_in {
            *b = *it.next().unwrap();
        }
        for t in &mut self.theta {
            *t = *it.next().unwrap();
        }
        for row in &mut self.w_out {
            for w in row.iter_mut() {
                *w = *it.next().unwrap();
            }
        }
        for b in &mut self.b_out {
            *b = *it.next().unwrap();
        }
        debug_assert!(it.next().is_none());
    }
}

impl VqcGradients {
    fn zeros(model: &VqcModel) -> Self {
        Self {
            w_in: vec![vec![0.0; model.dim]; NUM_QUBITS],
            b_in: vec![0.0; NUM_QUBITS],
            theta: vec![0.0; NUM_QUBITS],
            w_out: vec![vec![0.0; NUM_QUBITS]; model.num_classes],
            b_out: vec![0.0; model.num_classes],
        }
    }

    fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for row in &self.w_in {
            v.extend_from_slice(row);
        }
        v.extend_from_slice(&self.b_in);
        v.extend_from_slice(&self.theta);
        for row in &self.w_out {
            v.extend_from_slice(row);
        }
        v.extend_from_slice(&self.b_out);
        v
    }

    fn scale(&mut self, factor: f64) {
        for row in self.w_in.iter_mut().chain(self.w_out.iter_mut()) {
            for v in row.iter_mut() {
                *v *= factor;
            }
        }
        for v in self
            .b_in
            .iter_mut()
            .chain(self.theta.iter_mut())
            .chain(self.b_out.iter_mut())
        {
            *v *= factor;
        }
    }
}

/// x′ = W·x + b.
pub fn reduce(model: &VqcModel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.dim {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: model.dim,
        });
    }
    Ok(model
        .w_in
        .iter()
        .zip(&model.b_in)
        .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
        .collect())
}

/// Prepares ⊗ᵢ RY(x′ᵢ)H|0⟩, applies RY(θᵢ) on each qubit and the CX chain,
/// and returns the four Pauli-Z expectations.
pub fn embed_and_run(theta: &[f64], x_prime: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != NUM_QUBITS || x_prime.len() != NUM_QUBITS {
        return Err(Error::DimensionMismatch {
            left: theta.len(),
            right: x_prime.len(),
        });
    }
    let mut c = Circuit::new(NUM_QUBITS);
    for (q, &x) in x_prime.iter().enumerate() {
        c = c.h(q).ry(q, x);
    }
    for (q, &t) in theta.iter().enumerate() {
        c = c.ry(q, t);
    }
    for q in 0..NUM_QUBITS - 1 {
        c = c.cx(q, q + 1);
    }
    let state = apply_circuit(&Statevector::zero(NUM_QUBITS), &c)?;
    (0..NUM_QUBITS).map(|q| expectation_z(&state, q)).collect()
}

fn logits(model: &VqcModel, z: &[f64]) -> Vec<f64> {
    model
        .w_out
        .iter()
        .zip(&model.b_out)
        .map(|(row, b)| row.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + b)
        .collect()
}

/// Class probabilities ŷ = softmax(W_z·z + b_z).
pub fn forward(model: &VqcModel, x: &[f64]) -> Result<Vec<f64>> {
    let x_prime = reduce(model, x)?;
    let z = embed_and_run(&model.theta, &x_prime)?;
    Ok(softmax(&logits(model, &z)))
}

// d z / d angle for one circuit angle, by parameter shift (exact for RY
// generators) or central finite differences.
fn z_derivative(
    theta: &[f64],
    x_prime: &[f64],
    which: usize,
    is_theta: bool,
    mode: GradientMode,
) -> Result<Vec<f64>> {
    let (delta, denom) = match mode {
        GradientMode::ParameterShift => (std::f64::consts::FRAC_PI_2, 2.0),
        GradientMode::FiniteDifferenceCheck => (1e-5, 2e-5),
    };
    let mut t_plus = theta.to_vec();
    let mut t_minus = theta.to_vec();
    let mut x_plus = x_prime.to_vec();
    let mut x_minus = x_prime.to_vec();
    if is_theta {
        t_plus[which] += delta;
        t_minus[which] -= delta;
    } else {
        x_plus[which] += delta;
        x_minus[which] -= delta;
    }
    let z_plus = embed_and_run(&t_plus, &x_plus)?;
    let z_minus = embed_and_run(&t_minus, &x_minus)?;
    Ok(z_plus
        .iter()
        .zip(&z_minus)
        .map(|(p, m)| (p - m) / denom)
        .collect())
}

/// Gradient of the mean cross-entropy over a batch.
pub fn gradients(
    model: &VqcModel,
    batch_x: &[Vec<f64>],
    batch_y: &[usize],
    mode: GradientMode,
) -> Result<VqcGradients> {
    if batch_x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if batch_x.len() != batch_y.len() {
        return Err(Error::DimensionMismatch {
            left: batch_x.len(),
            right: batch_y.len(),
        });
    }
    let mut grad = VqcGradients::zeros(model);
    for (row, (x, &label)) in batch_x.iter().zip(batch_y).enumerate() {
        if label >= model.num_classes {
            return Err(Error::LabelOutOfRange {
                label,
                classes: model.num_classes,
                row,
            });
        }
        let x_prime = reduce(model, x)?;
        let z = embed_and_run(&model.theta, &x_prime)?;
        let probs = softmax(&logits(model, &z));

        // dL/dlogits = p − onehot(label); head gradients are analytic.
        let mut dlogits = probs;
        dlogits[label] -= 1.0;
        for (c, dl) in dlogits.iter().enumerate() {
            for (j, zj) in z.iter().enumerate() {
                grad.w_out[c][j] += dl * zj;
            }
            grad.b_out[c] += dl;
        }
        let dz: Vec<f64> = (0..NUM_QUBITS)
            .map(|j| {
                dlogits
                    .iter()
                    .enumerate()
                    .map(|(c, dl)| dl * model.w_out[c][j])
                    .sum()
            })
            .collect();

        // Circuit angles: θ directly, x′ chained into the reduction layer.
        for i in 0..NUM_QUBITS {
            let dzdt = z_derivative(&model.theta, &x_prime, i, true, mode)?;
            grad.theta[i] += dz.iter().zip(&dzdt).map(|(a, b)| a * b).sum::<f64>();
        }
        for i in 0..NUM_QUBITS {
            let dzdx = z_derivative(&model.theta, &x_prime, i, false, mode)?;
            let dxp: f64 = dz.iter().zip(&dzdx).map(|(a, b)| a * b).sum();
            for (k, xk) in x.iter().enumerate() {
                grad.w_in[i][k] += dxp * xk;
            }
            grad.b_in[i] += dxp;
        }
    }
    grad.scale(1.0 / batch_x.len() as f64);
    Ok(grad)
}

/// Runs epochs × ⌈n/batch⌉ Adam steps over seeded shuffled mini-batches.
/// Deterministic for a fixed config.
pub fn train(
    x: &[Vec<f64>],
    y: &[usize],
    cfg: &TrainConfig,
) -> Result<(VqcModel, Vec<EpochStats>)> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if cfg.batch_size == 0 || cfg.batch_size > x.len() {
        return Err(Error::BatchTooLarge {
            batch: cfg.batch_size,
            n: x.len(),
        });
    }
    let num_classes = y.iter().max().unwrap() + 1;
    if num_classes < 2 {
        return Err(Error::TooFewClasses(num_classes));
    }

    let mut model = VqcModel::init(x[0].len(), num_classes, cfg.seed);
    let adam_cfg = AdamConfig {
        learning_rate: cfg.learning_rate,
        ..AdamConfig::default()
    };
    let mut adam = AdamState::new(model.param_count(), adam_cfg);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64));
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);

        for batch in order.chunks(cfg.batch_size) {
            let bx: Vec<Vec<f64>> = batch.iter().map(|&i| x[i].clone()).collect();
            let by: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let grad = gradients(&model, &bx, &by, cfg.gradient_mode)?;
            let mut params = model.flatten();
            adam.step(&mut params, &grad.flatten())?;
            model.unflatten(&params);
        }

        let eval = evaluate(&model, x, y)?;
        history.push(EpochStats {
            epoch: epoch + 1,
            loss: eval.loss,
            accuracy: eval.metrics.accuracy,
        });
    }
    Ok((model, history))
}

/// Accuracy, mean cross-entropy and the confusion matrix on a dataset.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metrics: Metrics,
    pub loss: f64,
}

pub fn evaluate(model: &VqcModel, x: &[Vec<f64>], y: &[usize]) -> Result<Evaluation> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut probs = Vec::with_capacity(x.len());
    let mut predictions = Vec::with_capacity(x.len());
    for xi in x {
        let p = forward(model, xi)?;
        predictions.push(argmax(&p));
        probs.push(p);
    }
    let loss = cross_entropy(&probs, y)?;
    let metrics = metrics(&predictions, y, model.num_classes)?;
    Ok(Evaluation { metrics, loss })
}
