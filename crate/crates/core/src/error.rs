use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parameter vector length mismatch: expected {expected}, got {actual}")]
    ParameterLength { expected: usize, actual: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid Pauli string: {0}")]
    InvalidPauli(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("probability {p} outside the allowed range [0, {max})")]
    ProbabilityOutOfRange { p: f64, max: f64 },

    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("{n} qubits exceeds the exact-mode limit of {limit}")]
    QubitLimit { n: usize, limit: usize },

    #[error("transfer matrix requested on {0} qubits; at most 3 are supported")]
    PtmTooLarge(usize),

    #[error("index {index} out of range ({len} slots)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operation requires a single shared input state across all cost terms")]
    MultipleInputStates,

    #[error("degenerate ground space: E1 - E0 = {0:.3e}")]
    DegenerateGround(f64),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("energy {energy} outside [{e0}, {emax}]")]
    EnergyOutOfRange { energy: f64, e0: f64, emax: f64 },

    #[error("parameters are not a stationary point (gradient norm {0:.3e})")]
    NotStationary(f64),

    #[error("non-finite cost encountered")]
    NonFinite,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
