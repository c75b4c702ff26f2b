use thiserror::Error;

/// Errors raised by the numeric modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain [{a}, {b}]: need a < b")]
    InvalidDomain { a: f64, b: f64 },

    #[error("invalid knots: {0}")]
    InvalidKnots(String),

    #[error("t = {t} lies outside the domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("underdetermined fit: {rows} observations for {cols} basis functions")]
    Underdetermined { rows: usize, cols: usize },

    #[error("ill-conditioned normal equations (reciprocal condition {rcond:e})")]
    IllConditioned { rcond: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid dissimilarity matrix: {0}")]
    InvalidDissimilarity(String),

    #[error("series for object `{label}` has zero variance")]
    DegenerateSeries { label: String },

    #[error("window length {window} exceeds series length {len}")]
    WindowTooLong { window: usize, len: usize },

    #[error("embedding dimension {p} out of range 1..={max}")]
    Dim { p: usize, max: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("at least two objects are required, got {0}")]
    InsufficientObjects(usize),

    #[error("optimization diverged at epoch {epoch} (stress = {stress:e})")]
    Diverged { epoch: usize, stress: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
