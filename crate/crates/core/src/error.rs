use thiserror::Error;

use crate::prior::PriorKind;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The horseshoe-type densities have a logarithmic pole at the origin.
    #[error("density diverges at the origin (theta = 0)")]
    DivergesAtOrigin,

    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// Vectorised helpers report which element failed.
    #[error("grid point {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("prior kind {0:?} is not supported by this operation")]
    UnsupportedKind(PriorKind),

    #[error("argument {value} outside the open domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn at_index(self, index: usize) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
