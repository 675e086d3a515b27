//! Pauli-string decomposition of Hermitian matrices.
//!
//! A Hermitian 2^n x 2^n matrix M is expanded as M = Σ_j c_j P_j with real
//! coefficients c_j = trace(P_j M)/2^n over tensor products of {I, X, Y, Z}.
//! Letter k of a string acts on qubit k (little-endian, matching `sim`).

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;

use crate::error::{Error, Result};
use crate::sim::{Circuit, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Self::I),
            'X' => Some(Self::X),
            'Y' => Some(Self::Y),
            'Z' => Some(Self::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Self::I => 'I',
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Pauli operators, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<PauliLetter>,
}

impl PauliString {
    pub fn new(letters: Vec<PauliLetter>) -> Self {
        Self { letters }
    }

    /// Parses e.g. "XZI"; letter 0 acts on qubit 0.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(PauliLetter::from_char)
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    /// The identity string on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Self {
            letters: vec![PauliLetter::I; n],
        }
    }

    /// The `index`-th string (base-4 digits of `index`, qubit 0 first) on
    /// `n` qubits. Enumerates all 4^n strings for index in 0..4^n.
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut letters = Vec::with_capacity(n);
        for _ in 0..n {
            letters.push(match index & 3 {
                0 => PauliLetter::I,
                1 => PauliLetter::X,
                2 => PauliLetter::Y,
                _ => PauliLetter::Z,
            });
            index >>= 2;
        }
        Self { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    /// Action on a basis index: P|i⟩ = phase(i)·|i ^ flip_mask⟩.
    /// X and Y flip the qubit's bit; Y and Z contribute phases.
    pub fn action(&self, index: usize) -> (usize, Complex64) {
        let mut flipped = index;
        let mut phase = Complex64::ONE;
        for (q, letter) in self.letters.iter().enumerate() {
            let bit = (index >> q) & 1;
            match letter {
                PauliLetter::I => {}
                PauliLetter::X => flipped ^= 1 << q,
                PauliLetter::Y => {
                    flipped ^= 1 << q;
                    phase *= if bit == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                }
                PauliLetter::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (flipped, phase)
    }

    /// The string as a gate sequence (X/Y/Z on each non-identity qubit).
    pub fn to_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.len());
        for (q, letter) in self.letters.iter().enumerate() {
            match letter {
                PauliLetter::I => {}
                PauliLetter::X => c = c.x(q),
                PauliLetter::Y => c = c.y(q),
                PauliLetter::Z => c = c.z(q),
            }
        }
        c
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli strings representing a Hermitian operator.
/// Terms are sorted lexicographically by string for reproducible iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    pub num_qubits: usize,
    pub terms: Vec<(f64, PauliString)>,
    /// Sum of |c| over terms dropped by the truncation tolerance.
    pub truncated_weight: f64,
}

impl PauliDecomposition {
    /// Σ|c_j| over retained terms.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }
}

fn check_hermitian(matrix: &DMatrix<Complex64>) -> Result<usize> {
    let (rows, cols) = matrix.shape();
    if rows != cols || rows == 0 || !rows.is_power_of_two() {
        return Err(Error::BadMatrixShape { rows, cols });
    }
    let mut dev: f64 = 0.0;
    for i in 0..rows {
        for j in 0..rows {
            dev = dev.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
        }
    }
    if dev > 1e-9 {
        return Err(Error::NotHermitian(dev));
    }
    Ok(rows.trailing_zeros() as usize)
}

/// Expands a Hermitian matrix over Pauli strings; terms with |c| <= tol are
/// dropped and their total weight recorded.
pub fn decompose(matrix: &DMatrix<Complex64>, tol: f64) -> Result<PauliDecomposition> {
    let num_qubits = check_hermitian(matrix)?;
    let dim = 1usize << num_qubits;

    let mut terms = Vec::new();
    let mut truncated_weight = 0.0;
    for string_index in 0..(1usize << (2 * num_qubits)) {
        let string = PauliString::from_index(num_qubits, string_index);
        // trace(P·M) = Σ_i phase(i)·M[i, σ(i)] with P|i⟩ = phase(i)|σ(i)⟩.
        let mut trace = Complex64::ZERO;
        for i in 0..dim {
            let (sigma, phase) = string.action(i);
            trace += phase * matrix[(i, sigma)];
        }
        let coeff = trace / dim as f64;
        debug_assert!(
            coeff.im.abs() < 1e-9,
            "Hermitian input must give real coefficients, got {coeff}"
        );
        if coeff.re.abs() <= tol {
            truncated_weight += coeff.re.abs();
        } else {
            terms.push((coeff.re, string));
        }
    }
    terms.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(PauliDecomposition {
        num_qubits,
        terms,
        truncated_weight,
    })
}

/// Real symmetric convenience wrapper around [`decompose`].
pub fn decompose_real(matrix: &DMatrix<f64>, tol: f64) -> Result<PauliDecomposition> {
    let complex = matrix.map(|x| Complex64::new(x, 0.0));
    decompose(&complex, tol)
}

/// Σ c_j P_j as a dense matrix.
pub fn reconstruct(d: &PauliDecomposition) -> DMatrix<Complex64> {
    let dim = 1usize << d.num_qubits;
    let mut m = DMatrix::from_element(dim, dim, Complex64::ZERO);
    for (coeff, string) in &d.terms {
        for col in 0..dim {
            let (row, phase) = string.action(col);
            m[(row, col)] += phase * *coeff;
        }
    }
    m
}

/// Applies the tensor-product Pauli operator to a state. Involutive.
pub fn apply_pauli(state: &Statevector, p: &PauliString) -> Result<Statevector> {
    if p.len() != state.num_qubits() {
        return Err(Error::PauliLength {
            len: p.len(),
            num_qubits: state.num_qubits(),
        });
    }
    let mut amps = vec![Complex64::ZERO; state.dim()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let (j, phase) = p.action(i);
        amps[j] += phase * a;
    }
    Statevector::from_amplitudes(amps)
}
