use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register size mismatch: {left} vs {right} qubits")]
    LengthMismatch { left: usize, right: usize },

    #[error("{n_qubits} qubits exceeds the dense representation cap of {cap}")]
    RegisterTooLarge { n_qubits: usize, cap: usize },

    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("state dimension mismatch: expected {expected} amplitudes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("ancilla qubit collides with the system register")]
    AncillaCollision,

    #[error("commutator closure exceeded the cap of {cap} strings")]
    ClosureCapExceeded { cap: usize },

    #[error("basis size {size} exceeds the cap of {cap}")]
    BasisTooLarge { size: usize, cap: usize },

    #[error("time {t} is outside the coupling schedule domain [{start}, {end}]")]
    ScheduleDomain { t: f64, start: f64, end: f64 },

    #[error("{matrix} is not Hermitian: defect {defect:.3e} exceeds bound {bound:.3e}")]
    NonHermitian {
        matrix: &'static str,
        defect: f64,
        bound: f64,
    },

    #[error("norm drift {drift:.3e} at t = {t} exceeds {limit:.1e}")]
    NormDrift { drift: f64, t: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
