use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("merge element must be the only shared element")]
    InvalidMerge,
    #[error("subset is not consecutive")]
    NotConsecutive,
    #[error("element already present")]
    InvalidElement,
    #[error("enumeration bound exceeded ({0})")]
    TooLarge(u64),
    #[error("not a facial cycle of a planar rotation system")]
    InvalidCycle,
    #[error("restriction is impossible")]
    ImpossibleRestriction,
    #[error("{path}: {reason}")]
    Validation { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn at(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Validation { path: path.into(), reason: reason.into() }
}
