use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("operator is not hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("register of {requested} qubits exceeds the cap of {cap} (set KRYLOVGRAD_MAX_QUBITS to raise it)")]
    QubitCap { requested: usize, cap: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("Krylov dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("every overlap eigenvalue lies below the threshold {0:e}")]
    EmptySubspace(f64),

    #[error("state {index} is not retained (rank {rank})")]
    StateNotRetained { index: usize, rank: usize },

    #[error("phase fit did not converge: residual {residual:e} after {iterations} iterations")]
    PhaseFit { residual: f64, iterations: usize },

    #[error("success probability {p:e} below floor {floor:e}")]
    LowSuccessProbability { p: f64, floor: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
