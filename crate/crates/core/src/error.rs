use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The pulse channel has no unique fixed point (no absorption, or the
    /// drive rotation leaves a whole family of states invariant).
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("incomplete ensemble: no trajectories for initial eigenstate {0}")]
    IncompleteEnsemble(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
