use alloc::string::String;

/// Errors raised by the simulation kernels and experiments.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("system of {requested} qubits exceeds the {max}-qubit capacity")]
    Capacity { requested: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("qubit {0} listed more than once")]
    DuplicateTarget(usize),
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit system")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("matrix is not unitary (max |U†U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("not a density matrix: {0}")]
    InvalidDensity(&'static str),
    #[error("ensemble weights sum to {weight_sum}, expected 1")]
    InvalidEnsemble { weight_sum: f64 },
    #[error("discrete key space needs N >= 1")]
    EmptyKeySpace,
    #[error("weak-measurement strength {0} outside [0, 1]")]
    InvalidStrength(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
