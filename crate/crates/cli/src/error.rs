use std::path::PathBuf;

/// Exit code for configuration and input errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical contract violations.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] cmv_krylov::Error),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Format(_) => EXIT_CONFIG,
            CliError::Numerical(e) if is_input_error(e) => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::ChecksFailed { .. } => EXIT_NUMERICAL,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Core errors caused by the requested parameters rather than by the
/// numerics.
fn is_input_error(e: &cmv_krylov::Error) -> bool {
    use cmv_krylov::Error as E;
    matches!(
        e,
        E::InvalidParameter(_)
            | E::OutsideUnitDisk { .. }
            | E::OddSiteCount(_)
            | E::CircuitTooSmall { .. }
            | E::ZeroSeed
            | E::EmptySequence
    )
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
