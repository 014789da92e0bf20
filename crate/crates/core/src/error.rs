use std::path::PathBuf;

/// Errors produced by the estimation pipeline and its supporting modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("probability {value} at ({row}, {col}) is outside [0, 1]")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },

    #[error("eigensolver did not converge after {restarts} restarts (worst residual {worst_residual:.3e})")]
    NoConvergence { restarts: usize, worst_residual: f64 },

    #[error("prune needs more than r = {r} rows, got {n}")]
    TooFewRows { n: usize, r: usize },

    #[error("successive projection stalled after {picked} of {requested} picks (residual norm {norm:.3e})")]
    RankDeficient { picked: usize, requested: usize, norm: f64 },

    #[error("corner matrix is numerically singular (condition number {condition:.3e}) for candidates {candidates:?}")]
    SingularCorners { condition: f64, candidates: Vec<usize> },

    #[error("cannot construct witness: {0}")]
    Witness(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: file contains no edges")]
    EmptyFile(PathBuf),

    #[error("membership file {path}: {message}")]
    Membership { path: PathBuf, message: String },

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
