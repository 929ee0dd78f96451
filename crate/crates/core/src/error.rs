use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("dataset validation failed:\n{0}")]
    Validation(ValidationErrors),

    #[error("embedding file line {line}: {kind}")]
    EmbeddingFormat { line: usize, kind: EmbeddingFormatError },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("method sw_d_web needs an embedding store")]
    MissingEmbeddings,

    #[error("no questions to evaluate after filtering")]
    EmptySplit,

    #[error("unknown question id `{0}`")]
    UnknownQuestion(String),

    #[error("reports cover different question sets ({only_baseline} only in baseline, {only_method} only in method)")]
    QuestionSetMismatch { only_baseline: usize, only_method: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingFormatError {
    Empty,
    BadHeader,
    DimensionMismatch { expected: usize, found: usize },
    NonNumeric(String),
    NonFinite(String),
}

impl fmt::Display for EmbeddingFormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbeddingFormatError::Empty => write!(f, "file contains no vectors"),
            EmbeddingFormatError::BadHeader => write!(f, "malformed `count dim` header"),
            EmbeddingFormatError::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} components, found {found}")
            }
            EmbeddingFormatError::NonNumeric(tok) => write!(f, "non-numeric component `{tok}`"),
            EmbeddingFormatError::NonFinite(tok) => write!(f, "non-finite component `{tok}`"),
        }
    }
}

/// A single violated dataset invariant, attributed to the offending record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub id: String,
    pub message: String,
}

/// Every invariant violation found while validating a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<Violation>);

impl ValidationErrors {
    pub(crate) fn push(&mut self, id: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            id: id.into(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mentions(&self, id: &str) -> bool {
        self.0.iter().any(|v| v.id == id)
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {}: {}", v.id, v.message)?;
        }
        Ok(())
    }
}
