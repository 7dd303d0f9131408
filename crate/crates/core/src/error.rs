use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} of size {size} exceeds the capacity limit {limit}")]
    Capacity {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no photons to annihilate")]
    NoPhotons,
    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("basis mismatch: ({0}) vs ({1})")]
    BasisMismatch(String, String),
    #[error("invalid occupation vector {occ:?}: {reason}")]
    InvalidOccupation { occ: Vec<usize>, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid code pair: {}", .0.join("; "))]
    InvalidCode(Vec<String>),
    #[error("code does not satisfy the one-photon-loss correctability conditions")]
    NotCorrectable,
    #[error("unknown built-in {kind} `{name}`")]
    UnknownBuiltin { kind: &'static str, name: String },
    #[error("generator {index} (`{name}`) leaks out of the code space (leakage {leakage:.3e})")]
    LeakyGenerator {
        index: usize,
        name: String,
        leakage: f64,
    },
    #[error("generator leaks at first order (leakage {leakage:.3e})")]
    FirstOrderLeakage { leakage: f64 },
    #[error("recovery undefined for zero-weight channel (eigenvalue {eigenvalue:.3e} of G)")]
    SingularG { eigenvalue: f64 },
    #[error("damping parameter {0} outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
