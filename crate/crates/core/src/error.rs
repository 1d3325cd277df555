use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty vocabulary")]
    EmptyVocabulary,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("no reference corpus")]
    NoReferenceCorpus,
    #[error("numerical failure at update {update}")]
    NumericalFailure { update: u64 },
    #[error("undefined similarity: zero vector")]
    UndefinedSimilarity,
    #[error("zero variance")]
    ZeroVariance,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("nothing to embed: need at least 2 topics")]
    NothingToEmbed,
    #[error("empty selection: no thread below similarity threshold {0}")]
    EmptySelection(f64),
    #[error("malformed {what}: {detail}")]
    Format { what: String, detail: String },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: impl Into<String>, detail: impl ToString) -> Self {
        Error::Format {
            what: what.into(),
            detail: detail.to_string(),
        }
    }

    /// Tags the error with the workflow stage it came from (kept if already tagged).
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
