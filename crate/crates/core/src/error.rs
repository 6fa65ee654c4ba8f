use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("use-case document: {0}")]
    Document(String),

    #[error("realization {realization_id}: {source}")]
    Realization {
        realization_id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Empty(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("data: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
