use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read audio {path}: {reason}")]
    UnreadableAudio { path: PathBuf, reason: String },
    #[error("unsupported audio encoding in {path}: {encoding}")]
    UnsupportedEncoding { path: PathBuf, encoding: String },
    #[error("audio file {0} contains no samples")]
    EmptyAudio(PathBuf),
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input has rank {rank}, fewer than the {requested} requested components")]
    RankDeficient { rank: usize, requested: usize },
    #[error("unsupported Pauli label {0:?}")]
    UnsupportedPauli(String),
    #[error("kernel produced non-finite value {value} at pair ({i}, {j})")]
    NonFiniteKernel { i: usize, j: usize, value: f64 },
    #[error("Gram matrix is not positive semidefinite: minimum eigenvalue {lambda_min:e} < -{tol:e}")]
    NotPsd { lambda_min: f64, tol: f64 },
    #[error("both classes must be present ({0})")]
    SingleClass(String),
    #[error("degenerate separator ({context}): squared weight norm {w_norm_sq:e}")]
    DegenerateMargin { context: String, w_norm_sq: f64 },
    #[error("cache error: {0}")]
    Cache(String),
    #[error("leakage guard violated: {0}")]
    Leakage(String),
    #[error("kernel-swap contract violated: {0}")]
    KernelSwap(String),
}

/// Coarse grouping used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Invariant,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig(_) | Error::UnsupportedPauli(_) => ErrorClass::Config,
            Error::Io { .. }
            | Error::UnreadableAudio { .. }
            | Error::UnsupportedEncoding { .. }
            | Error::EmptyAudio(_)
            | Error::Manifest { .. }
            | Error::InvalidInput(_)
            | Error::RankDeficient { .. }
            | Error::SingleClass(_)
            | Error::DegenerateMargin { .. }
            | Error::NonFiniteKernel { .. }
            | Error::Cache(_) => ErrorClass::Data,
            Error::DimensionMismatch { .. }
            | Error::NotPsd { .. }
            | Error::Leakage(_)
            | Error::KernelSwap(_) => ErrorClass::Invariant,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
