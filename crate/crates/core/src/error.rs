use thiserror::Error;

pub type Result<T> = std::result::Result<T, SseError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SseError {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("maximum weight {weight} exceeds qubit count {n_qubits}")]
    WeightTooLarge { weight: usize, n_qubits: usize },

    #[error("unsupported qubit count {0}")]
    QubitCount(usize),

    #[error("invalid Pauli word {word:?}: {reason}")]
    InvalidPauli { word: String, reason: String },

    #[error("operator is not Hermitian (phase {0})")]
    NonHermitian(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no terms")]
    NoTerms,

    #[error("gate target {target} out of range for {n_qubits} qubits")]
    TargetOutOfRange { target: usize, n_qubits: usize },

    #[error("two-qubit gate needs distinct targets, got {0} twice")]
    RepeatedTarget(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension too large for dense diagonalization: {n_qubits} qubits (limit {limit})")]
    DimensionTooLarge { n_qubits: usize, limit: usize },

    #[error("overlap matrix fully degenerate")]
    DegenerateOverlap,

    #[error("empty symmetry sector")]
    EmptySymmetrySector,

    #[error("symmetry has mixed commutation with operator {0}; use symmetry projection")]
    MixedSymmetryCommutation(String),

    #[error("expansion basis must contain the identity operator")]
    MissingIdentity,

    #[error("zero normalization: w^dagger S w = {0}")]
    ZeroNormalization(f64),

    #[error("singular reference overlap matrix")]
    SingularReference,
}
