//! Hybrid quantum-classical weld-defect classifiers on an exact/shot-based
//! statevector simulator.
//!
//! Two pipelines share the simulator core:
//! - a quantum-kernel least-squares SVM whose dual system is solved by a
//!   Variational Quantum Linear Solver (`qkernel`, `vqls`, `qsvm`);
//! - a variational quantum circuit classifier with angle embedding and a
//!   linear-softmax head trained by parameter-shift gradients (`vqc`).
//!
//! `data` provides CSV ingestion and a seeded synthetic feature generator
//! standing in for an upstream CNN feature extractor; `cli` wires the
//! pieces into reproducible batch commands.

pub mod cli;
pub mod data;
pub mod error;
pub mod optim;
pub mod pauli;
pub mod qkernel;
pub mod qsvm;
pub mod report;
pub mod sim;
pub mod vqc;
pub mod vqls;

pub use error::{Error, Result};
