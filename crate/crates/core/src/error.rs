use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the supported numerical envelope.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid scalar or structural parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two disks overlap, touch, or a radius is not positive.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("could not place disk {index} of {requested} after {attempts} attempts ({placed} disks placed)")]
    Placement {
        index: usize,
        requested: usize,
        placed: usize,
        attempts: usize,
    },

    #[error("index {index} out of range for {len} disks")]
    Index { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The single-scattering preconditioner has a vanishing diagonal entry.
    #[error("singular preconditioner at disk {disk}, mode {mode}")]
    SingularPreconditioner { disk: usize, mode: i64 },

    #[error("matrix is singular to working precision (pivot column {0})")]
    Singular(usize),

    /// Failure while computing one column of a multi-right-hand-side run.
    #[error("column {column}: {message}")]
    Column { column: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
