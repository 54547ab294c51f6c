use thiserror::Error;

/// Errors produced by the simulator and the algorithms built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state width {requested} exceeds the {cap}-qubit budget")]
    WidthBudgetExceeded { requested: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("qubit {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register `{0}` already defined")]
    DuplicateRegister(String),
    #[error("control and target qubits overlap")]
    RegisterOverlap,
    #[error("register `{0}` is not zeroed")]
    RegisterNotZeroed(String),
    #[error("register `{0}` does not hold the expected constant")]
    RegisterNotPreloaded(String),
    #[error("value {value} does not fit in a {width}-qubit register")]
    ValueOutOfRange { value: u64, width: usize },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("register mismatch: {0}")]
    RegisterMismatch(String),
    #[error("oracle cannot be relocated")]
    NotRelocatable,
}

pub type Result<T> = std::result::Result<T, Error>;
