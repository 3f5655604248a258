use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown project `{0}`")]
    ProjectNotFound(String),
    #[error("unknown segment `{segment}` in project `{project}`")]
    SegmentNotFound { project: String, segment: String },
    #[error("unknown session `{session}` in project `{project}`")]
    SessionNotFound { project: String, session: String },
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] postedit_core::Error),
    #[error("storage: {0}")]
    Storage(String),
}

impl ServiceError {
    /// Stable machine-readable kind, used in error bodies.
    pub fn kind(&self) -> &'static str {
        use postedit_core::Error as E;
        match self {
            ServiceError::ProjectNotFound(_)
            | ServiceError::SegmentNotFound { .. }
            | ServiceError::SessionNotFound { .. } => "notFound",
            ServiceError::Conflict(_) | ServiceError::Core(E::DuplicateRecord { .. } | E::DuplicateEntry(_)) => {
                "conflict"
            }
            ServiceError::Invalid(_) | ServiceError::Core(_) => "invalid",
            ServiceError::Storage(_) => "storage",
        }
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Storage(e.to_string())
    }
}

pub type ServiceResult<T> = std::result::Result<T, ServiceError>;
