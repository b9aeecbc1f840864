use thiserror::Error;

/// Errors raised by graph construction, estimation and benchmarking.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NegativeWeight: edge ({i}, {j}) has non-positive weight {w}")]
    NegativeWeight { i: usize, j: usize, w: f64 },

    #[error("SelfLoop: node {0}")]
    SelfLoop(usize),

    #[error("ConflictingDuplicate: edge ({i}, {j}) listed with weights {first} and {second}")]
    ConflictingDuplicate {
        i: usize,
        j: usize,
        first: f64,
        second: f64,
    },

    #[error("NodeOutOfRange: node {node} but graph has {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("DimensionMismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ParseError at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("FormatViolation: {0}")]
    FormatViolation(String),

    #[error("Io: {path}: {msg}")]
    Io { path: String, msg: String },

    #[error("SizeTooSmall: {0}")]
    SizeTooSmall(String),

    #[error("BadParameters: {0}")]
    BadParameters(String),

    #[error("DuplicatePoints: points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("BadK: k = {k} must satisfy 1 <= k < n = {n}")]
    BadK { k: usize, n: usize },

    #[error("NonPositiveQ: q must be > 0, got {0}")]
    NonPositiveQ(f64),

    #[error("ZeroReplicates: at least one replicate is required")]
    ZeroReplicates,

    #[error("MaxIterationsExceeded: {iterations} iterations, relative residual {residual:e}")]
    MaxIterationsExceeded {
        x: Vec<f64>,
        iterations: usize,
        residual: f64,
    },

    #[error("TooLarge: dimension {n} exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("NotSymmetric: entry ({i}, {j}) differs from its transpose")]
    NotSymmetric { i: usize, j: usize },

    #[error("NotPositiveDefinite: dense factorization failed")]
    NotPositiveDefinite,

    #[error("NotDiagonallyDominant: row {0}")]
    NotDiagonallyDominant(usize),

    #[error("InternalInconsistency: {0}")]
    InternalInconsistency(String),

    #[error("BisectionFailed: {0}")]
    BisectionFailed(String),

    #[error("ZeroMeanPilot: pilot mean must be > 0, got {0}")]
    ZeroMeanPilot(f64),

    #[error("Unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            msg: err.to_string(),
        }
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveQ(q))
    }
}
