//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or run configuration. The message names the field.
    #[error("config error: {0}")]
    Config(String),

    /// Mismatched state/noise dimensions between a system, path, or field.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Node index outside the usable range of a path or trajectory.
    #[error("node {node} out of range (usable |node| <= {max})")]
    NodeRange { node: i64, max: i64 },

    /// A state became NaN or infinite during integration.
    #[error("integration fault: non-finite state at node {node}")]
    NonFinite { node: i64 },

    /// A Wiener path is too short for the requested operation.
    #[error("path too short: {0}")]
    InsufficientPath(String),

    /// An analysis operation received a field it cannot work with.
    #[error("degenerate field: {0}")]
    Degenerate(String),

    /// Malformed or truncated file content.
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
