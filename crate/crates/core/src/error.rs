use thiserror::Error;

/// Errors raised by the simulator, the metric estimators and the sweep layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("{0} qubits requested, at most {max} supported", max = crate::qcore::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state vector is not normalized (norm deviation {0:e})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (max deviation of U^dagger U from identity {0:e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("probability {name} = {value} outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("invalid confusion matrix: {0}")]
    InvalidConfusion(String),

    #[error("T2 = {t2} ns exceeds twice T1 = {t1} ns; relaxation channel would not be completely positive")]
    CpViolation { t1: f64, t2: f64 },

    #[error("invalid relaxation parameter: {0}")]
    InvalidRelaxation(String),

    #[error("angle {name} = {value} outside its canonical range")]
    InvalidAngle { name: &'static str, value: f64 },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("gamma_{pair} undefined: marginal probability {marginal:e} at or below threshold")]
    GammaUndefined { pair: &'static str, marginal: f64 },

    #[error("missing subset probability for paths {0:?}")]
    MissingSubset(Vec<usize>),

    #[error("at least {needed} samples required, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
