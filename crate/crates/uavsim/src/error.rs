use thiserror::Error;

/// Errors surfaced by simulator operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x}, {y}) lies outside the {width} m x {height} m region")]
    OutOfRegion {
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },

    /// No perfect matching avoids the unreachable cost entries.
    #[error("infeasible assignment: {0}")]
    Infeasible(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
