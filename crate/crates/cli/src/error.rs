use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const TOLERANCE: i32 = 1;
    pub const IO: i32 = 2;
    pub const RESOURCES: i32 = 3;
    pub const BAD_STATE: i32 = 4;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}, line {line}: {msg}")]
    Config {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("bad state: {0}")]
    BadState(String),
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    #[error(transparent)]
    Core(#[from] fisherlab::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use fisherlab::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::BadState(_) => exit::BAD_STATE,
            CliError::Tolerance(_) => exit::TOLERANCE,
            CliError::Core(e) => match e {
                E::ResourceLimit { .. } | E::GridTooSmall { .. } => exit::RESOURCES,
                E::MomentumDrift { .. } => exit::TOLERANCE,
                E::InvalidOrder(_)
                | E::OrderOutOfRange(_)
                | E::InvalidDelta(_)
                | E::InvalidTime(_)
                | E::InvalidArgument(_)
                | E::InvalidGrid(_)
                | E::InsufficientSamples { .. } => exit::USAGE,
                E::ZeroNorm | E::NotNormalized { .. } | E::NonFinite { .. } => exit::BAD_STATE,
                _ => exit::TOLERANCE,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
