use thiserror::Error;

/// Errors raised by quasi-state constructions and measurements.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotUnit { trace: f64 },

    #[error("expected a unit vector, norm is {norm}")]
    NonUnitVector { norm: f64 },

    #[error("direction is not allowed for this preparation: |r.n| = {dot} > 1")]
    InvalidDirection { dot: f64 },

    #[error("element {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { index: usize, min_eigenvalue: f64 },

    #[error("POVM elements do not sum to identity (deviation {deviation:e})")]
    IncompletePovm { deviation: f64 },

    #[error("resource does not violate complementarity (|r| = {norm})")]
    NotViolating { norm: f64 },

    #[error("transverse components too large: 1/r^2 + y^2 + z^2 = {value} > 1")]
    TransverseTooLarge { value: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("construction check failed: {0}")]
    BrokenConstruction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
