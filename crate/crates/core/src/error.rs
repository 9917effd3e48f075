use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: non-numeric value {value:?} at row {row}, column {column}")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{0} failed to converge")]
    Decomposition(&'static str),

    #[error("affinity matrix has no edges; every representation coefficient is zero")]
    DegenerateAffinity,

    #[error("sample cannot be assigned: every class residual is infinite")]
    Unassignable,

    #[error("column {column}: {source}")]
    Column {
        column: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{} column(s) failed, first at column {}: {}", .0.len(), .0[0].0, .0[0].1)]
    Columns(Vec<(usize, Error)>),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn at_column(self, column: usize) -> Self {
        Error::Column {
            column,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage and column wrappers peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Column { source, .. } | Error::Stage { source, .. } => source.root(),
            Error::Columns(errs) if !errs.is_empty() => errs[0].1.root(),
            other => other,
        }
    }

    /// True for errors caused by bad caller-supplied parameters rather than
    /// by the data or a numerical routine.
    pub fn is_usage(&self) -> bool {
        matches!(self.root(), Error::InvalidArgument(_))
    }
}
