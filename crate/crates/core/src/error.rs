use thiserror::Error;

/// Errors raised by the design, analysis and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least {required} observations, found {found}")]
    InsufficientData { required: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("design matrix is rank deficient at column {column} ({name})")]
    Singular { column: usize, name: String },

    #[error("cannot standardize exams: {}", .0.join("; "))]
    Standardization(Vec<String>),

    #[error("duplicate student id {0}")]
    DuplicateStudent(String),

    #[error("missing record for student {0}")]
    MissingRecord(String),

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
