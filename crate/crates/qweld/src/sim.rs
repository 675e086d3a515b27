//! Exact statevector simulation of the gate set used by both classifier
//! pipelines, plus Hadamard-test overlap estimation in exact and
//! shot-sampled modes.
//!
//! Conventions: qubit 0 is the least significant bit of a basis index
//! (little-endian), so `|10⟩` written with qubit 0 first is basis index 1.
//! States are immutable values; every operation returns a new state.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Pure state of `num_qubits` qubits as 2^n complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// The all-zeros computational basis state |0…0⟩.
    pub fn zero(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "state needs at least one qubit");
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[0] = Complex64::ONE;
        Self { num_qubits, amps }
    }

    /// A single computational basis state |index⟩.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut s = Self::zero(num_qubits);
        s.amps[0] = Complex64::ZERO;
        s.amps[index] = Complex64::ONE;
        s
    }

    /// Builds a state from raw amplitudes; the length must be a power of two
    /// and the norm must be 1 within 1e-9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let drift = (norm_sq.sqrt() - 1.0).abs();
        if drift > 1e-9 {
            return Err(Error::NotNormalized(drift));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Measurement probabilities |amplitude|^2 per basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// One gate application. `control`/`angle` are required by the controlled
/// and parameterized kinds respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H {
        target: usize,
    },
    Ry {
        target: usize,
        angle: f64,
    },
    Rz {
        target: usize,
        angle: f64,
    },
    Crz {
        control: usize,
        target: usize,
        angle: f64,
    },
    Cx {
        control: usize,
        target: usize,
    },
    X {
        target: usize,
    },
    Y {
        target: usize,
    },
    Z {
        target: usize,
    },
}

impl Gate {
    pub fn target(&self) -> usize {
        match *self {
            Gate::H { target }
            | Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::Crz { target, .. }
            | Gate::Cx { target, .. }
            | Gate::X { target }
            | Gate::Y { target }
            | Gate::Z { target } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Crz { control, .. } | Gate::Cx { control, .. } => Some(control),
            _ => None,
        }
    }

    /// The inverse gate: rotations negate their angle, the rest are
    /// self-inverse.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Ry { target, angle } => Gate::Ry {
                target,
                angle: -angle,
            },
            Gate::Rz { target, angle } => Gate::Rz {
                target,
                angle: -angle,
            },
            Gate::Crz {
                control,
                target,
                angle,
            } => Gate::Crz {
                control,
                target,
                angle: -angle,
            },
            g => g,
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let t = self.target();
        if t >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: t,
                num_qubits,
            });
        }
        if let Some(c) = self.control() {
            if c >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: c,
                    num_qubits,
                });
            }
            if c == t {
                return Err(Error::ControlEqualsTarget(t));
            }
        }
        Ok(())
    }
}

/// Ordered gate sequence on a fixed-width register.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub ops: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            ops: Vec::new(),
        }
    }

    pub fn h(mut self, target: usize) -> Self {
        self.ops.push(Gate::H { target });
        self
    }

    pub fn ry(mut self, target: usize, angle: f64) -> Self {
        self.ops.push(Gate::Ry { target, angle });
        self
    }

    pub fn rz(mut self, target: usize, angle: f64) -> Self {
        self.ops.push(Gate::Rz { target, angle });
        self
    }

    pub fn crz(mut self, control: usize, target: usize, angle: f64) -> Self {
        self.ops.push(Gate::Crz {
            control,
            target,
            angle,
        });
        self
    }

    pub fn cx(mut self, control: usize, target: usize) -> Self {
        self.ops.push(Gate::Cx { control, target });
        self
    }

    pub fn x(mut self, target: usize) -> Self {
        self.ops.push(Gate::X { target });
        self
    }

    pub fn y(mut self, target: usize) -> Self {
        self.ops.push(Gate::Y { target });
        self
    }

    pub fn z(mut self, target: usize) -> Self {
        self.ops.push(Gate::Z { target });
        self
    }

    pub fn push(&mut self, gate: Gate) {
        self.ops.push(gate);
    }

    /// Appends all ops of `other` (same register width expected).
    pub fn extend(&mut self, other: &Circuit) {
        self.ops.extend_from_slice(&other.ops);
    }

    pub fn validate(&self) -> Result<()> {
        for op in &self.ops {
            op.validate(self.num_qubits)?;
        }
        Ok(())
    }

    /// The inverse circuit: ops reversed, rotation angles negated.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            ops: self.ops.iter().rev().map(Gate::inverse).collect(),
        }
    }
}

/// Exact expectations or seeded shot sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunMode {
    Exact,
    Sampled,
}

/// How expectation values are obtained from circuits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotConfig {
    pub mode: RunMode,
    pub shots: u64,
    pub seed: u64,
}

impl ShotConfig {
    pub fn exact() -> Self {
        Self {
            mode: RunMode::Exact,
            shots: 0,
            seed: 0,
        }
    }

    pub fn sampled(shots: u64, seed: u64) -> Self {
        Self {
            mode: RunMode::Sampled,
            shots,
            seed,
        }
    }

    /// Same mode and shot count with a different RNG stream.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if self.mode == RunMode::Sampled && self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(())
    }
}

/// Part of a complex overlap selected by a Hadamard test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapPart {
    Real,
    Imag,
}

/// Derives an independent RNG stream from a master seed (splitmix64 step).
/// Used to give every sampled circuit in a batch its own reproducible seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

// Gate kernels. `extra_control` gates the whole op on an additional qubit
// being 1, which is how controlled versions of tested unitaries are
// synthesized for the Hadamard test.
fn apply_gate(
    amps: &mut [Complex64],
    num_qubits: usize,
    gate: &Gate,
    extra_control: Option<usize>,
) {
    let dim = amps.len();
    let t = gate.target();
    let t_mask = 1usize << t;
    let mut ctrl_mask = 0usize;
    if let Some(c) = gate.control() {
        ctrl_mask |= 1 << c;
    }
    if let Some(c) = extra_control {
        ctrl_mask |= 1 << c;
    }
    debug_assert!(t < num_qubits || extra_control.is_some());

    match *gate {
        Gate::H { .. } => {
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..dim {
                if i & t_mask == 0 && i & ctrl_mask == ctrl_mask {
                    let j = i | t_mask;
                    let a = amps[i];
                    let b = amps[j];
                    amps[i] = (a + b) * inv_sqrt2;
                    amps[j] = (a - b) * inv_sqrt2;
                }
            }
        }
        Gate::Ry { angle, .. } => {
            let c = (angle / 2.0).cos();
            let s = (angle / 2.0).sin();
            for i in 0..dim {
                if i & t_mask == 0 && i & ctrl_mask == ctrl_mask {
                    let j = i | t_mask;
                    let a = amps[i];
                    let b = amps[j];
                    amps[i] = a * c - b * s;
                    amps[j] = a * s + b * c;
                }
            }
        }
        Gate::Rz { angle, .. } | Gate::Crz { angle, .. } => {
            let phase0 = Complex64::from_polar(1.0, -angle / 2.0);
            let phase1 = Complex64::from_polar(1.0, angle / 2.0);
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & ctrl_mask == ctrl_mask {
                    *amp *= if i & t_mask == 0 { phase0 } else { phase1 };
                }
            }
        }
        Gate::Cx { .. } | Gate::X { .. } => {
            for i in 0..dim {
                if i & t_mask == 0 && i & ctrl_mask == ctrl_mask {
                    amps.swap(i, i | t_mask);
                }
            }
        }
        Gate::Y { .. } => {
            let plus_i = Complex64::new(0.0, 1.0);
            let minus_i = Complex64::new(0.0, -1.0);
            for i in 0..dim {
                if i & t_mask == 0 && i & ctrl_mask == ctrl_mask {
                    let j = i | t_mask;
                    let a = amps[i];
                    let b = amps[j];
                    amps[i] = b * minus_i;
                    amps[j] = a * plus_i;
                }
            }
        }
        Gate::Z { .. } => {
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & t_mask != 0 && i & ctrl_mask == ctrl_mask {
                    *amp = -*amp;
                }
            }
        }
    }
}

/// Applies each op of `circuit` in order and returns the resulting state.
pub fn apply_circuit(state: &Statevector, circuit: &Circuit) -> Result<Statevector> {
    if circuit.num_qubits != state.num_qubits {
        return Err(Error::DimensionMismatch {
            left: circuit.num_qubits,
            right: state.num_qubits,
        });
    }
    circuit.validate()?;
    let mut amps = state.amps.clone();
    for op in &circuit.ops {
        apply_gate(&mut amps, state.num_qubits, op, None);
    }
    Ok(Statevector {
        num_qubits: state.num_qubits,
        amps,
    })
}

/// ⟨a|b⟩, conjugate-linear in the first argument.
pub fn inner_product(a: &Statevector, b: &Statevector) -> Result<Complex64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch {
            left: a.num_qubits,
            right: b.num_qubits,
        });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// ⟨ψ|Z_qubit|ψ⟩ ∈ [-1, 1].
pub fn expectation_z(state: &Statevector, qubit: usize) -> Result<f64> {
    if qubit >= state.num_qubits {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            num_qubits: state.num_qubits,
        });
    }
    let mask = 1usize << qubit;
    Ok(state
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let sign = if i & mask == 0 { 1.0 } else { -1.0 };
            sign * a.norm_sqr()
        })
        .sum())
}

/// Estimates Re or Im of ⟨ψ|Û|ψ⟩ with ψ = prep|0…0⟩ and Û the tested
/// unitary, using one ancilla on top of the system register. Exact mode
/// returns the overlap part exactly; sampled mode returns 2·P̂(ancilla=0)−1
/// from `cfg.shots` samples drawn with `cfg.seed`.
pub fn hadamard_test(
    prep: &Circuit,
    tested: &Circuit,
    part: OverlapPart,
    cfg: &ShotConfig,
) -> Result<f64> {
    cfg.validate()?;
    if prep.num_qubits != tested.num_qubits {
        return Err(Error::DimensionMismatch {
            left: prep.num_qubits,
            right: tested.num_qubits,
        });
    }
    prep.validate()?;
    tested.validate()?;

    let n = prep.num_qubits;
    let ancilla = n;
    let dim = 1usize << (n + 1);
    let mut amps = vec![Complex64::ZERO; dim];
    amps[0] = Complex64::ONE;

    // System prep and ancilla superposition act on disjoint qubits.
    for op in &prep.ops {
        apply_gate(&mut amps, n + 1, op, None);
    }
    apply_gate(&mut amps, n + 1, &Gate::H { target: ancilla }, None);

    // Tested unitary, controlled on the ancilla.
    for op in &tested.ops {
        apply_gate(&mut amps, n + 1, op, Some(ancilla));
    }

    if part == OverlapPart::Imag {
        // S† on the ancilla up to a global phase.
        apply_gate(
            &mut amps,
            n + 1,
            &Gate::Rz {
                target: ancilla,
                angle: -std::f64::consts::FRAC_PI_2,
            },
            None,
        );
    }
    apply_gate(&mut amps, n + 1, &Gate::H { target: ancilla }, None);

    let ancilla_mask = 1usize << ancilla;
    match cfg.mode {
        RunMode::Exact => {
            let p0: f64 = amps
                .iter()
                .enumerate()
                .filter(|(i, _)| i & ancilla_mask == 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            Ok(2.0 * p0 - 1.0)
        }
        RunMode::Sampled => {
            let state = Statevector {
                num_qubits: n + 1,
                amps,
            };
            let counts = sample_counts(&state, cfg)?;
            let zeros: u64 = counts
                .iter()
                .filter(|(i, _)| *i & ancilla_mask == 0)
                .map(|(_, c)| *c)
                .sum();
            Ok(2.0 * (zeros as f64) / (cfg.shots as f64) - 1.0)
        }
    }
}

/// Draws `cfg.shots` basis-state samples from |amplitude|^2 and returns the
/// histogram. The same seed always reproduces the same histogram.
pub fn sample_counts(state: &Statevector, cfg: &ShotConfig) -> Result<BTreeMap<usize, u64>> {
    if cfg.mode != RunMode::Sampled {
        return Err(Error::ZeroShots);
    }
    cfg.validate()?;

    // Inverse-CDF sampling keeps the draw deterministic for a given seed.
    let mut cdf = Vec::with_capacity(state.dim());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..cfg.shots {
        let u: f64 = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(state.dim() - 1);
        *counts.entry(idx).or_insert(0) += 1;
    }
    Ok(counts)
}
