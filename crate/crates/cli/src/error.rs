use thiserror::Error;

/// CLI-level errors with their process exit codes:
/// 1 input/validation, 2 usage, 3 internal numerical failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    /// Core errors raised while loading a file are input problems regardless
    /// of their library classification.
    pub fn input_from_core(e: randers_core::Error) -> Self {
        CliError::Input(e.to_string())
    }

    /// Core errors raised while running a command keep their classification.
    pub fn from_core(e: randers_core::Error) -> Self {
        use randers_core::Error as E;
        match e {
            E::Usage(_) => CliError::Usage(e.to_string()),
            E::Numerical(_) => CliError::Numerical(e.to_string()),
            E::DimensionMismatch { .. } | E::Degenerate(_) | E::Validation { .. } => {
                CliError::Input(e.to_string())
            }
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Input(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
