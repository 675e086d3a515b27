//! Feature normalization, amplitude encoding, quantum kernel matrices and
//! their conditioning.
//!
//! Feature vectors are normalized to unit norm and written directly onto
//! statevector amplitudes, zero-padded to the next power of two; the kernel
//! is K_ij = |⟨x̃_i|x̃_j⟩|². A matching state-preparation circuit (a tree of
//! multiplexed RY rotations) realizes the same encoding as a gate sequence,
//! which the linear solver needs to Hadamard-test overlaps against |b⟩.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::{
    derive_seed, hadamard_test, inner_product, Circuit, OverlapPart, ShotConfig, Statevector,
};

/// Qubits needed to hold a `d`-dimensional amplitude vector (minimum 1).
pub fn num_qubits_for_dim(d: usize) -> usize {
    let padded = d.next_power_of_two().max(2);
    padded.trailing_zeros() as usize
}

fn check_finite(x: &[f64]) -> Result<()> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature(i));
    }
    Ok(())
}

/// x / ‖x‖. Errors on near-zero vectors, which signal degenerate features.
pub fn normalize(x: &[f64]) -> Result<Vec<f64>> {
    check_finite(x)?;
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 1e-12 {
        return Err(Error::ZeroNorm);
    }
    Ok(x.iter().map(|v| v / norm).collect())
}

/// Writes a unit-norm vector onto the first `d` amplitudes of a
/// ceil(log2(d))-qubit state; remaining amplitudes are zero.
pub fn amplitude_encode(x: &[f64]) -> Result<Statevector> {
    check_finite(x)?;
    if x.is_empty() {
        return Err(Error::ZeroNorm);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized((norm - 1.0).abs()));
    }
    let q = num_qubits_for_dim(x.len());
    let mut amps = vec![Complex64::ZERO; 1 << q];
    for (a, &v) in amps.iter_mut().zip(x) {
        *a = Complex64::new(v, 0.0);
    }
    Statevector::from_amplitudes(amps)
}

// Multiplexed RY: for every bit pattern p over `controls` (first control is
// the pattern's most significant bit), rotate `target` by `angles[p]`.
// Recursive CX-conjugation halving; exact, stays in the {RY, CX} gate set.
fn multiplexed_ry(circuit: &mut Circuit, controls: &[usize], target: usize, angles: &[f64]) {
    debug_assert_eq!(angles.len(), 1 << controls.len());
    if controls.is_empty() {
        if angles[0] != 0.0 {
            circuit.push(crate::sim::Gate::Ry {
                target,
                angle: angles[0],
            });
        }
        return;
    }
    let half = angles.len() / 2;
    let (low, high) = angles.split_at(half);
    let sums: Vec<f64> = low.iter().zip(high).map(|(a, b)| (a + b) / 2.0).collect();
    let diffs: Vec<f64> = low.iter().zip(high).map(|(a, b)| (a - b) / 2.0).collect();
    multiplexed_ry(circuit, &controls[1..], target, &sums);
    circuit.push(crate::sim::Gate::Cx {
        control: controls[0],
        target,
    });
    multiplexed_ry(circuit, &controls[1..], target, &diffs);
    circuit.push(crate::sim::Gate::Cx {
        control: controls[0],
        target,
    });
}

/// Synthesizes a circuit preparing the amplitude encoding of a unit-norm
/// real vector from |0…0⟩, via a binary tree of multiplexed RY rotations.
pub fn state_prep_circuit(x: &[f64]) -> Result<Circuit> {
    check_finite(x)?;
    if x.is_empty() {
        return Err(Error::ZeroNorm);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized((norm - 1.0).abs()));
    }
    let q = num_qubits_for_dim(x.len());
    let dim = 1usize << q;

    // levels[k][i]: subtree amplitude of node i at depth k; leaves keep
    // their sign, interior nodes are norms.
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(q + 1);
    let mut leaf = vec![0.0; dim];
    leaf[..x.len()].copy_from_slice(x);
    levels.push(leaf);
    for _ in 0..q {
        let prev = levels.last().unwrap();
        let next: Vec<f64> = (0..prev.len() / 2)
            .map(|i| (prev[2 * i].powi(2) + prev[2 * i + 1].powi(2)).sqrt())
            .collect();
        levels.push(next);
    }
    levels.reverse(); // levels[k] now has 2^k nodes

    let mut circuit = Circuit::new(q);
    for k in 0..q {
        let target = q - 1 - k;
        let controls: Vec<usize> = (0..k).map(|j| q - 1 - j).collect();
        let angles: Vec<f64> = (0..(1 << k))
            .map(|i| 2.0 * levels[k + 1][2 * i + 1].atan2(levels[k + 1][2 * i]))
            .collect();
        multiplexed_ry(&mut circuit, &controls, target, &angles);
    }
    Ok(circuit)
}

/// Exact kernel entry |⟨x̃_a|x̃_b⟩|² between two raw feature vectors.
pub fn kernel_entry(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let sa = amplitude_encode(&normalize(a)?)?;
    let sb = amplitude_encode(&normalize(b)?)?;
    Ok(inner_product(&sa, &sb)?.norm_sqr())
}

/// Shot-sampled kernel entry estimated from Hadamard tests on the overlap
/// circuit U_a† U_b. Provided for noise studies; the training paths use the
/// exact entries.
pub fn kernel_entry_sampled(a: &[f64], b: &[f64], cfg: &ShotConfig) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let prep_a = state_prep_circuit(&normalize(a)?)?;
    let prep_b = state_prep_circuit(&normalize(b)?)?;
    let mut overlap = prep_b.clone();
    overlap.extend(&prep_a.inverse());
    let empty = Circuit::new(overlap.num_qubits);
    let re = hadamard_test(
        &empty,
        &overlap,
        OverlapPart::Real,
        &cfg.with_seed(derive_seed(cfg.seed, 0)),
    )?;
    let im = hadamard_test(
        &empty,
        &overlap,
        OverlapPart::Imag,
        &cfg.with_seed(derive_seed(cfg.seed, 1)),
    )?;
    Ok(re * re + im * im)
}

/// K_ij = |⟨x̃_i|x̃_j⟩|² over a dataset; symmetric, unit diagonal, PSD.
pub fn kernel_matrix(xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = xs[0].len();
    let mut states = Vec::with_capacity(xs.len());
    for x in xs {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: d,
            });
        }
        states.push(amplitude_encode(&normalize(x)?)?);
    }
    let n = xs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let v = inner_product(&states[i], &states[j])?.norm_sqr();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let dev = (m - m.transpose()).abs().max();
    if dev > 1e-9 {
        return Err(Error::NotSymmetric(dev));
    }
    Ok(())
}

/// Extreme eigenvalues (λ_min, λ_max) of a symmetric matrix.
pub fn spectral_bounds(m: &DMatrix<f64>) -> Result<(f64, f64)> {
    check_symmetric(m)?;
    let eigs = m.clone().symmetric_eigenvalues();
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

/// κ = λ_max/λ_min of a symmetric positive-definite matrix. Eigenvalues
/// within floating-point noise of zero (relative to λ_max) count as
/// non-positive, signalling insufficient regularization.
pub fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    let (min, max) = spectral_bounds(m)?;
    if min <= 1e-12 * max.abs().max(1.0) {
        return Err(Error::NonPositiveEigenvalue(min));
    }
    Ok(max / min)
}
