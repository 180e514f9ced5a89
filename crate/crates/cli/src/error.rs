use std::path::{Path, PathBuf};

/// A command failure, carrying the process exit status it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    RowValidation(String),
    #[error("parity check failed")]
    ParityFailed,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 0 ok, 1 parity or validation failure, 2 I/O or parse error, 3 row
    /// validation error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::ParityFailed => 1,
            CliError::Io { .. } | CliError::Parse(_) => 2,
            CliError::RowValidation(_) => 3,
        }
    }
}
