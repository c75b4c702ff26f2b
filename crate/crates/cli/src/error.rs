use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: row {row}, column {col}: {msg}")]
    IngestCell { path: PathBuf, row: usize, col: usize, msg: String },
    #[error("{path}: {msg}")]
    Ingest { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(#[from] fmds_core::Error),
    #[error("verification failed")]
    VerifyFailed,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn ingest(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Self::Ingest { path: path.into(), msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code: 2 usage/config, 3 ingest or file access, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        use fmds_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::IngestCell { .. } | Self::Ingest { .. } | Self::Io { .. } => 3,
            Self::VerifyFailed => 4,
            Self::Core(e) => match e {
                E::Config(_)
                | E::Dim { .. }
                | E::InvalidKnots(_)
                | E::InvalidDomain { .. }
                | E::WindowTooLong { .. }
                | E::Underdetermined { .. }
                | E::Shape(_) => 2,
                E::InvalidDissimilarity(_) | E::DegenerateSeries { .. } | E::InsufficientObjects(_) => 3,
                E::IllConditioned { .. } | E::Numerical(_) | E::Diverged { .. } | E::OutOfDomain { .. } => 4,
            },
        }
    }
}
