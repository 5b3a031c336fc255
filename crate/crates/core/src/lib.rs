//! Stabilizer simulation of monitored, noisy Clifford circuits with tools for
//! coherent-information phase diagrams, finite-size scaling and a
//! post-selection-free verification probe.

pub mod chi;
pub mod circuit;
pub mod clifford;
pub mod crosscheck;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod observables;
pub mod pauli;
pub mod rng;
pub mod scaling;
pub mod tableau;

pub use clifford::CliffordGate;
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliOperator};
pub use tableau::{GeneratorSet, MeasurementResult, Mode};
