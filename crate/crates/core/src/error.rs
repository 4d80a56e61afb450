use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a type invariant.
    #[error("invalid `{field}`: {constraint}")]
    InvalidConfig { field: String, constraint: String },

    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The effective frequency of a detector trajectory vanishes.
    #[error("no fringe along this cut: effective frequency is zero")]
    NoFringe,

    #[error("no stripes: {0}")]
    NoStripes(String),

    #[error("cut line exits the grid: {0}")]
    LineOutsideGrid(String),

    #[error("degenerate normalization: integral is {0}")]
    DegenerateNormalization(f64),

    #[error("rejection bound {bound} exceeded by rate {rate} at ({x1}, {x2})")]
    BoundViolated {
        bound: f64,
        rate: f64,
        x1: f64,
        x2: f64,
    },

    #[error("self-check failed: {0}")]
    SelfCheck(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line driver.
    ///
    /// 1 for configuration problems, 2 for physics or validation failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. }
            | Error::UnknownKeys(_)
            | Error::Parse { .. }
            | Error::UnknownPreset(_) => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
