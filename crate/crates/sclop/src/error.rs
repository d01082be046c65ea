use std::io;
use std::path::{Path, PathBuf};

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Compute(#[from] sclop_core::Error),
}

impl CliError {
    /// 1 for failures inside a computation, 2 for bad invocations and
    /// unreadable or malformed files.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, message: impl ToString) -> CliError {
        CliError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}
