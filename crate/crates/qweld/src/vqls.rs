//! Variational solver for M|α⟩ = |b⟩: hardware-efficient ansatz, a
//! normalized-overlap cost assembled from Hadamard tests over the Pauli
//! terms of M, and the derivative-free optimization loop.
//!
//! The cost is C(θ) = 1 − |⟨b|M̂|α(θ)⟩|² / ⟨α(θ)|M̂²|α(θ)⟩ ∈ [0, 1] in exact
//! mode (shot sampling adds a small margin). Coefficients are normalized by
//! Σ|c_j| before testing, which leaves the ratio unchanged while keeping
//! every tested term's magnitude at most 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optim::{minimize_dfo, DfoConfig};
use crate::pauli::{decompose_real, PauliDecomposition};
use crate::qkernel::{num_qubits_for_dim, state_prep_circuit};
use crate::sim::{
    apply_circuit, derive_seed, hadamard_test, Circuit, OverlapPart, ShotConfig, Statevector,
};

/// Default truncation tolerance for the Pauli expansion of M.
pub const DEFAULT_PAULI_TOL: f64 = 1e-8;

/// Regularized kernel system M = K + λI (zero-padded to 2^q) with a
/// unit-norm target vector, its Pauli expansion and a circuit preparing |b⟩.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub m: DMatrix<f64>,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub num_qubits: usize,
    /// Leading rows that carry data; the rest is padding.
    pub n_samples: usize,
    pub decomposition: PauliDecomposition,
    pub b_prep: Circuit,
}

impl LinearSystem {
    /// Wraps an explicit symmetric matrix and unit-norm target vector.
    pub fn new(m: DMatrix<f64>, b: Vec<f64>, lambda: f64) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::BadMatrixShape {
                rows: dim,
                cols: m.ncols(),
            });
        }
        if b.len() != dim {
            return Err(Error::DimensionMismatch {
                left: b.len(),
                right: dim,
            });
        }
        let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        let decomposition = decompose_real(&m, DEFAULT_PAULI_TOL)?;
        let b_prep = state_prep_circuit(&b)?;
        Ok(Self {
            m,
            b,
            lambda,
            num_qubits: dim.trailing_zeros() as usize,
            n_samples: dim,
            decomposition,
            b_prep,
        })
    }

    /// Normalized dense solution of M x = b (unit norm), the classical
    /// reference the variational solution is measured against.
    pub fn dense_solution(&self) -> Result<Vec<f64>> {
        let rhs = DVector::from_column_slice(&self.b);
        let x = self
            .m
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("LU solve failed".into()))?;
        let norm = x.norm();
        if norm <= 1e-300 {
            return Err(Error::SingularSystem("zero solution".into()));
        }
        Ok(x.iter().map(|v| v / norm).collect())
    }
}

/// Builds M = K + λI and b = y/‖y‖, both zero-padded into dimension 2^q.
/// Padded diagonal entries are 1 + λ and padded b entries are 0, so the
/// padding block stays decoupled from the data block.
pub fn build_system(k: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<LinearSystem> {
    let n = k.nrows();
    if k.ncols() != n || n == 0 {
        return Err(Error::BadMatrixShape {
            rows: n,
            cols: k.ncols(),
        });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            left: y.len(),
            right: n,
        });
    }
    if lambda < 0.0 {
        return Err(Error::NegativeLambda(lambda));
    }
    let q = num_qubits_for_dim(n);
    let dim = 1usize << q;

    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if i < n && j < n {
                m[(i, j)] = k[(i, j)] + if i == j { lambda } else { 0.0 };
            } else if i == j {
                m[(i, j)] = 1.0 + lambda;
            }
        }
    }

    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if y_norm <= 1e-12 {
        return Err(Error::ZeroNorm);
    }
    let mut b = vec![0.0; dim];
    for (bi, &yi) in b.iter_mut().zip(y) {
        *bi = yi / y_norm;
    }

    let mut sys = LinearSystem::new(m, b, lambda)?;
    sys.n_samples = n;
    Ok(sys)
}

/// Hardware-efficient ansatz: per layer an RY rotation on every qubit
/// followed by a chain of CRZ entanglers on adjacent pairs, then a final
/// RY layer.
#[derive(Debug, Clone)]
pub struct VqlsAnsatz {
    pub num_qubits: usize,
    pub layers: usize,
    pub params: Vec<f64>,
}

impl VqlsAnsatz {
    /// layers × (q RY angles + q−1 CRZ angles) + q final RY angles.
    pub fn param_count(num_qubits: usize, layers: usize) -> usize {
        layers * (2 * num_qubits - 1) + num_qubits
    }

    pub fn new(num_qubits: usize, layers: usize, params: Vec<f64>) -> Result<Self> {
        let expected = Self::param_count(num_qubits, layers);
        if params.len() != expected {
            return Err(Error::ParameterCount {
                expected,
                actual: params.len(),
            });
        }
        Ok(Self {
            num_qubits,
            layers,
            params,
        })
    }

    /// Uniform random angles in [0, 2π) from the given seed.
    pub fn random(num_qubits: usize, layers: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let params = (0..Self::param_count(num_qubits, layers))
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        Self {
            num_qubits,
            layers,
            params,
        }
    }

    pub fn circuit(&self) -> Circuit {
        let q = self.num_qubits;
        let mut c = Circuit::new(q);
        let mut idx = 0;
        for _ in 0..self.layers {
            for t in 0..q {
                c = c.ry(t, self.params[idx]);
                idx += 1;
            }
            for t in 0..q.saturating_sub(1) {
                c = c.crz(t, t + 1, self.params[idx]);
                idx += 1;
            }
        }
        for t in 0..q {
            c = c.ry(t, self.params[idx]);
            idx += 1;
        }
        debug_assert_eq!(idx, self.params.len());
        c
    }

    /// V(θ)|0…0⟩.
    pub fn state(&self) -> Result<Statevector> {
        apply_circuit(&Statevector::zero(self.num_qubits), &self.circuit())
    }
}

/// Outcome of a variational solve.
#[derive(Debug, Clone)]
pub struct VqlsResult {
    pub params_opt: Vec<f64>,
    pub cost_trace: Vec<f64>,
    /// Unit-norm real amplitudes of the optimal ansatz state (global phase
    /// removed), including padded coordinates.
    pub solution_amplitudes: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_cost: Option<f64>,
}

// One complex overlap ⟨0|W|0⟩ from two Hadamard tests. `stream` labels the
// pair of RNG streams so every sampled circuit stays reproducible.
fn overlap(
    prep: &Circuit,
    tested: &Circuit,
    cfg: &ShotConfig,
    eval_seed: u64,
    stream: u64,
) -> Result<Complex64> {
    let re = hadamard_test(
        prep,
        tested,
        OverlapPart::Real,
        &cfg.with_seed(derive_seed(eval_seed, 2 * stream)),
    )?;
    let im = hadamard_test(
        prep,
        tested,
        OverlapPart::Imag,
        &cfg.with_seed(derive_seed(eval_seed, 2 * stream + 1)),
    )?;
    Ok(Complex64::new(re, im))
}

fn cost_seeded(
    ansatz: &VqlsAnsatz,
    sys: &LinearSystem,
    cfg: &ShotConfig,
    eval_seed: u64,
) -> Result<f64> {
    if ansatz.num_qubits != sys.num_qubits {
        return Err(Error::DimensionMismatch {
            left: ansatz.num_qubits,
            right: sys.num_qubits,
        });
    }
    let terms = &sys.decomposition.terms;
    let l1 = sys.decomposition.coefficient_l1();
    if l1 <= 1e-300 {
        return Err(Error::DegenerateDenominator(0.0));
    }
    let coeffs: Vec<f64> = terms.iter().map(|(c, _)| c / l1).collect();
    let pauli_circuits: Vec<Circuit> = terms.iter().map(|(_, p)| p.to_circuit()).collect();
    let t = terms.len();

    let v_circuit = ansatz.circuit();
    let v_dagger = v_circuit.inverse();
    let u_dagger = sys.b_prep.inverse();
    let empty = Circuit::new(sys.num_qubits);

    // Numerator: |⟨b|M̂|α⟩|² from per-term overlaps
    //   β_n = ⟨0|U† A_n V|0⟩   and   γ_m = ⟨0|V† A_m U|0⟩.
    let betas: Vec<Complex64> = (0..t)
        .into_par_iter()
        .map(|n| {
            let mut w = v_circuit.clone();
            w.extend(&pauli_circuits[n]);
            w.extend(&u_dagger);
            overlap(&empty, &w, cfg, eval_seed, n as u64)
        })
        .collect::<Result<_>>()?;
    let gammas: Vec<Complex64> = (0..t)
        .into_par_iter()
        .map(|m| {
            let mut w = sys.b_prep.clone();
            w.extend(&pauli_circuits[m]);
            w.extend(&v_dagger);
            overlap(&empty, &w, cfg, eval_seed, (t + m) as u64)
        })
        .collect::<Result<_>>()?;
    let beta_sum: Complex64 = coeffs
        .iter()
        .zip(&betas)
        .map(|(c, b)| Complex64::new(*c, 0.0) * b)
        .sum();
    let gamma_sum: Complex64 = coeffs
        .iter()
        .zip(&gammas)
        .map(|(c, g)| Complex64::new(*c, 0.0) * g)
        .sum();
    let numerator = (gamma_sum * beta_sum).re;

    // Denominator: ⟨α|M̂²|α⟩. Diagonal terms are ⟨α|A_m²|α⟩ = 1 exactly;
    // off-diagonal pairs contribute 2·c_m·c_n·Re⟨0|V† A_m A_n V|0⟩.
    let pairs: Vec<(usize, usize)> = (0..t)
        .flat_map(|m| ((m + 1)..t).map(move |n| (m, n)))
        .collect();
    let pair_values: Vec<f64> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(m, n))| {
            let mut w = pauli_circuits[n].clone();
            w.extend(&pauli_circuits[m]);
            hadamard_test(
                &v_circuit,
                &w,
                OverlapPart::Real,
                &cfg.with_seed(derive_seed(eval_seed, (4 * t + k) as u64)),
            )
        })
        .collect::<Result<_>>()?;
    let mut denominator: f64 = coeffs.iter().map(|c| c * c).sum();
    for (&(m, n), w) in pairs.iter().zip(&pair_values) {
        denominator += 2.0 * coeffs[m] * coeffs[n] * w;
    }

    if denominator < 1e-12 {
        return Err(Error::DegenerateDenominator(denominator));
    }
    Ok(1.0 - numerator / denominator)
}

/// C(θ) per the normalized-overlap cost, assembled from Hadamard tests.
pub fn cost(ansatz: &VqlsAnsatz, sys: &LinearSystem, cfg: &ShotConfig) -> Result<f64> {
    cost_seeded(ansatz, sys, cfg, cfg.seed)
}

/// Squared overlap of two real vectors after normalization.
pub fn fidelity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na <= 0.0 || nb <= 0.0 {
        return 0.0;
    }
    (dot * dot) / (na * nb)
}

// Removes the global phase and drops the imaginary residue. The rotation
// angle γ = arg(Σ_j α_j²)/2 maximizes the norm of the real projection
// Re(e^{-iγ}α); for states that are a real vector up to phase it recovers
// that vector exactly. Falls back to aligning the largest amplitude when
// Σ α_j² vanishes.
fn read_solution(state: &Statevector) -> Vec<f64> {
    let amps = state.amplitudes();
    let s: Complex64 = amps.iter().map(|a| a * a).sum();
    let rot = if s.norm() > 1e-12 {
        Complex64::from_polar(1.0, -s.arg() / 2.0)
    } else {
        let (idx, _) = amps
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .expect("non-empty state");
        (amps[idx] / amps[idx].norm()).conj()
    };
    let rotated: Vec<f64> = amps.iter().map(|a| (a * rot).re).collect();
    let norm = rotated.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 1e-300 {
        return rotated;
    }
    rotated.into_iter().map(|v| v / norm).collect()
}

/// Runs the derivative-free loop over the Hadamard-test cost and reads the
/// solution amplitudes from the exact statevector of the optimal ansatz.
/// Non-convergence is reported through the flag, not as an error.
pub fn solve(
    sys: &LinearSystem,
    layers: usize,
    dfo: &DfoConfig,
    shot: &ShotConfig,
) -> Result<VqlsResult> {
    let q = sys.num_qubits;
    let initial = VqlsAnsatz::random(q, layers, dfo.seed);

    let mut eval_index: u64 = 0;
    let result = minimize_dfo(
        |params: &[f64]| {
            let ansatz = VqlsAnsatz {
                num_qubits: q,
                layers,
                params: params.to_vec(),
            };
            let seed = derive_seed(shot.seed, eval_index);
            eval_index += 1;
            cost_seeded(&ansatz, sys, shot, seed)
        },
        &initial.params,
        dfo,
    )?;

    let best = VqlsAnsatz::new(q, layers, result.x_best.clone())?;
    let solution_amplitudes = read_solution(&best.state()?);
    let converged = !result.trace.is_empty() && result.cost_best <= dfo.epsilon;
    let final_cost = if result.trace.is_empty() {
        None
    } else {
        Some(result.cost_best)
    };

    Ok(VqlsResult {
        params_opt: result.x_best,
        cost_trace: result.trace,
        solution_amplitudes,
        iterations: 0,
        converged,
        final_cost,
    }
    .with_iterations())
}

impl VqlsResult {
    fn with_iterations(mut self) -> Self {
        self.iterations = self.cost_trace.len();
        self
    }
}
