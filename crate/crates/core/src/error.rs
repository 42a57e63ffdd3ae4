use thiserror::Error;

use crate::geom::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polyline: {0}")]
    InvalidPolyline(String),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("degenerate diagram near ({}, {}): {reason}", point.x, point.y)]
    Degenerate { point: Point, reason: String },

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("non-generic: {0}")]
    NonGeneric(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a non-generic configuration rather than malformed input.
    pub fn is_non_generic(&self) -> bool {
        matches!(self, Error::NonGeneric(_) | Error::Degenerate { .. })
    }

    pub(crate) fn degenerate(point: Point, reason: impl Into<String>) -> Self {
        Error::Degenerate { point, reason: reason.into() }
    }
}
