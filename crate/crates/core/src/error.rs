use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level {level} is out of range (diagram stores {stored} levels and is truncated)")]
    LevelOutOfRange { level: usize, stored: usize },

    #[error("level must be at least 1, got {0}")]
    ZeroLevel(usize),

    #[error("vertex {vertex} does not exist at level {level} ({count} vertices)")]
    NoSuchVertex {
        level: usize,
        vertex: usize,
        count: usize,
    },

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("{what} exceeds cap: {size} > {cap}")]
    CapExceeded {
        what: &'static str,
        size: String,
        cap: String,
    },

    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("depth mismatch: need depth {needed}, have {available}")]
    DepthExceeded { needed: usize, available: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("matrix is not primitive (no strictly positive power up to exponent {0})")]
    NotPrimitive(usize),

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no exact rational invariant measure: {0}")]
    NotRational(String),

    #[error("sampling reached vertex {vertex} at level {level} with zero mass")]
    ZeroMass { level: usize, vertex: usize },

    #[error("invalid group element: {0}")]
    InvalidElement(String),

    #[error("invalid clopen set: {0}")]
    InvalidClopen(String),

    #[error("invalid multi-index: {0}")]
    InvalidAlpha(String),

    #[error("unknown measure label {label} ({available} measures available)")]
    UnknownLabel { label: usize, available: usize },

    #[error("Gram matrix is not symmetric at ({row}, {col}): {a} vs {b}")]
    NonSymmetric {
        row: usize,
        col: usize,
        a: f64,
        b: f64,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
