use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator width mismatch: {left} vs {right} qubits")]
    WidthMismatch { left: usize, right: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate targets must be distinct, got {0:?}")]
    RepeatedTarget(Vec<usize>),
    #[error("gate of arity {arity} applied to {given} targets")]
    Arity { arity: usize, given: usize },
    #[error("measured operator must have phase ±1")]
    NonHermitian,
    #[error("forced outcome {forced} contradicts deterministic outcome {determined}")]
    Contradiction { forced: u8, determined: u8 },
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("dense state limited to {max} qubits, requested {requested}")]
    TooManyQubits { max: usize, requested: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("underdetermined fit: {points} points for degree {degree}")]
    Underdetermined { points: usize, degree: usize },
    #[error("objective returned NaN at {0:?}")]
    NonFiniteObjective(Vec<f64>),
    #[error("generator {0} has support outside the ancilla register")]
    SupportOutsideAncilla(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
