use std::fmt;

use thiserror::Error;

/// Which end of `[0, inf)` makes a radial integral diverge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Origin,
    Infinity,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Origin => f.write_str("r = 0"),
            Endpoint::Infinity => f.write_str("r = infinity"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter mismatch: {0}")]
    ParamsMismatch(String),
    #[error("singular evaluation: {0}")]
    Singularity(String),
    #[error("integral diverges at {endpoint} because of term {term}")]
    Divergent { term: String, endpoint: Endpoint },
    #[error("not a polynomial: offending term {0}")]
    NotPolynomial(String),
    #[error("wrong family: expected {expected}, got {got}")]
    WrongFamily { expected: String, got: String },
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("incompatible geometry: {0}")]
    Geometry(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature(_) | Error::Inconsistent(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
