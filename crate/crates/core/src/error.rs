use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("{0} is empty")]
    EmptyInput(&'static str),

    #[error("interaction #{index} (user {user}, item {item}) has no timestamp")]
    MissingTimestamp {
        index: usize,
        user: usize,
        item: usize,
    },

    #[error("{kind} index {index} out of range (size {size})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        size: usize,
    },

    #[error("cosine score undefined for a zero-norm vector")]
    ZeroNorm,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("user {user} has interacted with every item; no negatives to sample")]
    NoNegatives { user: usize },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("shortcut model must be {0}")]
    FrozenState(&'static str),

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("refusing to overwrite {0} (pass --force)")]
    WouldOverwrite(PathBuf),

    #[error("invariant check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
