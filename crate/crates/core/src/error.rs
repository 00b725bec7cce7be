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

    #[error("missing field {field} at line {line}")]
    MissingField { field: &'static str, line: usize },

    #[error("malformed record at line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },

    #[error("articles reference unregistered outlets: {}", .0.join(", "))]
    UnknownOutlets(Vec<String>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("category {0} has no edges")]
    EmptyCategory(String),

    #[error("degenerate null distribution")]
    DegenerateNull,

    #[error("threshold tuning undefined: development set contains a single class")]
    SingleClass,

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("rank-deficient projection")]
    RankDeficient,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("config: {0}")]
    Config(String),

    #[error("requires: {stage} (missing artifact {artifact})")]
    MissingStage { stage: &'static str, artifact: String },

    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    /// A record-level error of an input file, tagged with that file.
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<Error> },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by user input (bad config, malformed files,
    /// out-of-order stages) rather than by the computation itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MissingField { .. }
                | Error::Malformed { .. }
                | Error::DuplicateId { .. }
                | Error::UnknownOutlets(_)
                | Error::InvalidParameter(_)
                | Error::Config(_)
                | Error::MissingStage { .. }
        ) || matches!(self, Error::InFile { source, .. } if source.is_validation())
    }

    /// Tags record-level errors with the file they came from.
    pub(crate) fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            Error::MissingField { .. } | Error::Malformed { .. } | Error::DuplicateId { .. } => Error::InFile {
                path: path.to_path_buf(),
                source: Box::new(self),
            },
            other => other,
        }
    }
}
