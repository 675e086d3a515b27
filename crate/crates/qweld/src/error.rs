//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulator, solvers and data pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("control and target qubits must differ (both {0})")]
    ControlEqualsTarget(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("amplitude vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),

    #[error("shots must be >= 1 in sampled mode")]
    ZeroShots,

    #[error("expected {expected} parameters, got {actual}")]
    ParameterCount { expected: usize, actual: usize },

    #[error("matrix must be square with power-of-two dimension, got {rows}x{cols}")]
    BadMatrixShape { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max deviation {0:.3e}")]
    NotHermitian(f64),

    #[error("matrix is not symmetric: max deviation {0:.3e}")]
    NotSymmetric(f64),

    #[error("Pauli string length {len} does not match {num_qubits} qubits")]
    PauliLength { len: usize, num_qubits: usize },

    #[error("feature vector has zero (or near-zero) norm")]
    ZeroNorm,

    #[error("feature vector contains a non-finite entry at index {0}")]
    NonFiniteFeature(usize),

    #[error("non-finite cost value at parameters {params:?}")]
    NonFiniteCost { params: Vec<f64> },

    #[error("non-finite gradient component at index {0}")]
    NonFiniteGradient(usize),

    #[error(
        "cost denominator {0:.3e} below 1e-12: ansatz state is annihilated by the system operator"
    )]
    DegenerateDenominator(f64),

    #[error("minimum eigenvalue {0:.6e} is not positive; increase regularization")]
    NonPositiveEigenvalue(f64),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("rescaling fit undefined: amplitudes have zero variance")]
    ZeroVariance,

    #[error("{0} samples exceed the 2^{1} = {2} system dimension")]
    TooManySamples(usize, usize, usize),

    #[error("negative regularization lambda {0}")]
    NegativeLambda(f64),

    #[error("training requires at least two classes, found {0}")]
    TooFewClasses(usize),

    #[error("label {label} out of range for {classes} classes (row {row})")]
    LabelOutOfRange {
        label: usize,
        classes: usize,
        row: usize,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("batch size {batch} exceeds dataset size {n}")]
    BatchTooLarge { batch: usize, n: usize },

    #[error("split fraction {0} yields an empty train or test split")]
    EmptySplit(f64),

    #[error("csv error in {path} (row {row}): {msg}")]
    Csv {
        path: String,
        row: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
