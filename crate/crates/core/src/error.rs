use std::path::PathBuf;

use crate::sql::SqlError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A broken invariant on one of the domain types.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("label/token length mismatch: {labels} labels for {tokens} tokens")]
    LabelTokenMismatch { labels: usize, tokens: usize },
    #[error("BIO well-formedness: {label} at position {position} does not continue a span")]
    IllFormedBio { position: usize, label: String },
    #[error("category mismatch: stored {stored}, labels imply {derived}")]
    CategoryMismatch { stored: String, derived: String },
    #[error("empty column name in table {table_id}")]
    EmptyColumn { table_id: String },
    #[error("duplicate column {column:?} in table {table_id}")]
    DuplicateColumn { table_id: String, column: String },
    #[error("cells reference unknown column {column:?}")]
    UnknownCellColumn { column: String },
    #[error("grounding span [{start}, {end}] is out of range or not covered by COL, VAL or AMB labels")]
    UncoveredGrounding { start: usize, end: usize },
    #[error(
        "grounding span [{start}, {end}] must carry between 1 and 3 candidates sorted by descending score in [0, 1]"
    )]
    BadCandidates { start: usize, end: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("missing field {0:?}")]
    MissingField(&'static str),
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    InvalidRecord {
        line: usize,
        #[source]
        source: ValidationError,
    },
    #[error("line {line}: {source}")]
    InvalidSql {
        line: usize,
        #[source]
        source: SqlError,
    },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Sql(#[from] SqlError),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no candidates")]
    NoCandidates,
    #[error("response requested for an answerable question")]
    AnswerableResponse,
    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures that come from the file system rather than the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
