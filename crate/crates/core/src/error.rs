use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: wrong lengths, mismatched signatures or grids,
    /// values violating a type invariant.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input is well formed but outside the range the computation supports.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A configured resource cap (grid node count) would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
