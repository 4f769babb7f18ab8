use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported topology: {num_cells} cells (only the 7-cell ring is supported)")]
    UnsupportedTopology { num_cells: usize },

    #[error("zero distance between BS {bs} and user {user} of cell {cell}")]
    DegenerateDistance { bs: usize, user: usize, cell: usize },

    #[error("no pilot-contamination interference for pilot {pilot} in cell {cell}")]
    NoInterference { cell: usize, pilot: usize },

    #[error("exhaustive search supports at most {max} pilots, got {users}")]
    TooManyPilots { users: usize, max: usize },

    #[error("previous SINR of user {user} in cell {cell} is zero")]
    ZeroSinr { cell: usize, user: usize },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid pilot assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("failed to parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("drop {drop_id} (seed {seed:#018x}) failed: {source}")]
    Drop {
        drop_id: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::UnsupportedTopology { .. } => "unsupported_topology",
            Error::DegenerateDistance { .. } => "degenerate_distance",
            Error::NoInterference { .. } => "no_interference",
            Error::TooManyPilots { .. } => "too_many_pilots",
            Error::ZeroSinr { .. } => "zero_sinr",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::InvalidAssignment(_) => "invalid_assignment",
            Error::InvalidConfig { .. } => "invalid_config",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Drop { source, .. } => source.category(),
        }
    }
}
