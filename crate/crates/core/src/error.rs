use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("degenerate data: column {column} has zero variance")]
    DegenerateData { column: usize },

    #[error("weight covariance is singular after regularization")]
    SingularWeightCovariance,

    #[error("effective sample size {ess:.3} is below the required {required:.3}")]
    WeightUnderflow { ess: f64, required: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("matrix has zero trace")]
    ZeroMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("only {found} valid weight points survived rejection, {required} required")]
    TooFewValidWeightPoints { found: usize, required: usize },

    #[error("source column {0} has zero variance")]
    ZeroVarianceSource(usize),

    #[error("zero vector")]
    ZeroVector,

    #[error("singular matrix")]
    SingularMatrix,

    #[error("methods were scored on different trial sets")]
    MismatchedTrialSets,

    #[error("gave up after {attempts} attempts: {reason}")]
    RetryExhausted { attempts: usize, reason: String },

    #[error("column {0} is empty")]
    EmptyColumn(usize),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RaggedRows {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("{path}: unsupported format: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("{path}: corrupt header at byte {offset}: {message}")]
    CorruptHeader {
        path: PathBuf,
        offset: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
