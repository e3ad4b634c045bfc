use serde::Serialize;
use thiserror::Error;

/// Errors raised by the numerical and geometric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Interval closures touch; the cross-block operator leaves every
    /// Schatten class at zero gap.
    #[error("interval closures touch at {at}")]
    TouchingClosures { at: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),
}

/// Coarse error classes, used for machine-readable reporting and exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorClass {
    Geometry,
    Argument,
    Numerical,
    Resource,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Geometry => "GEOMETRY",
            ErrorClass::Argument => "ARGUMENT",
            ErrorClass::Numerical => "NUMERICAL",
            ErrorClass::Resource => "RESOURCE",
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::TouchingClosures { .. } | Error::Domain(_) => ErrorClass::Geometry,
            Error::Argument(_) => ErrorClass::Argument,
            Error::Numerical(_) => ErrorClass::Numerical,
            Error::Resource(_) => ErrorClass::Resource,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
