use std::path::PathBuf;

use krotov_lq::ErrorCategory;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{op}: {source}")]
    Core {
        op: &'static str,
        #[source]
        source: krotov_lq::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read scenario {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest: {0}")]
    Manifest(String),
}

impl CliError {
    /// 1 for invalid input, 2 for solver failures, 3 for numerical blowup.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } => match source.category() {
                ErrorCategory::Validation => 1,
                ErrorCategory::Solver => 2,
                ErrorCategory::Numerical => 3,
            },
            CliError::Io { .. } | CliError::Read { .. } | CliError::Manifest(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Tags a core error with the operation that produced it.
pub trait Context<T> {
    fn op(self, op: &'static str) -> Result<T>;
}

impl<T> Context<T> for krotov_lq::Result<T> {
    fn op(self, op: &'static str) -> Result<T> {
        self.map_err(|source| CliError::Core { op, source })
    }
}
