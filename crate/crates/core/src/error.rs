use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Arguments outside the operation's domain (bad index, cap too small, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degree caps differ: {left:?} vs {right:?}")]
    CapsMismatch { left: Vec<usize>, right: Vec<usize> },

    /// Malformed input file; the message carries line and column.
    #[error("parse error: {0}")]
    Parse(String),

    /// The truncated ring would need more cells than the configured guard allows.
    #[error("resource limit exceeded: {cells} cells requested, limit is {limit}")]
    CellLimit { cells: u128, limit: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
