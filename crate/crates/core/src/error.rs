use thiserror::Error;

/// Errors produced by the geometry kernel.
///
/// The variants map onto the CLI exit codes: input/validation problems,
/// usage problems (the request itself is meaningless), and numerical
/// failures inside an otherwise well-posed computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Linearly dependent input, zero vector where a direction is required,
    /// a projection that collapsed to zero, and similar.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A structural invariant failed validation; carries the named defect.
    #[error("validation failed: {name}={defect:.6e} exceeds {tol:.1e}")]
    Validation { name: String, defect: f64, tol: f64 },

    /// The operation does not apply to the given structure.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn validation(name: &str, defect: f64, tol: f64) -> Self {
        Error::Validation {
            name: name.to_string(),
            defect,
            tol,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
