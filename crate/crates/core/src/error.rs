use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate entry id `{0}`")]
    DuplicateEntry(String),

    #[error("alignment link {link:?} of entry `{entry}` is out of range")]
    AlignmentOutOfRange { entry: String, link: (usize, usize) },

    #[error("edit script does not fit segment: {0}")]
    ScriptMismatch(String),

    #[error("invalid label sequence: {0}")]
    InvalidLabels(String),

    #[error("origin {0} cannot be ingested from an external table")]
    NotIngestible(String),

    #[error("segment `{segment}` already has a record from translator `{translator}` in this session")]
    DuplicateRecord { segment: String, translator: String },

    #[error("finish time precedes start time")]
    NegativeDuration,

    #[error("scratch records must start from empty text")]
    ScratchWithInitialText,

    #[error("log schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0} requires at least {1} observations")]
    TooFewObservations(&'static str, usize),

    #[error("series `{0}` is constant, correlation is undefined")]
    ConstantSeries(&'static str),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
