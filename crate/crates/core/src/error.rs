use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{factor}: argument within {distance:.3e} of pole at {}{:+}i", location.re, location.im)]
    Pole {
        factor: String,
        location: Complex64,
        distance: f64,
    },
    #[error("accuracy: {0}")]
    Accuracy(String),
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite integrand value at node {0:?}")]
    NonFinite(Vec<Complex64>),
}

impl Error {
    /// True for failures caused by the numerics (poles, contours, convergence)
    /// rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Pole { .. } | Error::Accuracy(_) | Error::Infeasible(_) | Error::NonFinite(_)
        )
    }

    pub(crate) fn with_factor(self, name: impl Into<String>) -> Self {
        match self {
            Error::Pole { location, distance, .. } => Error::Pole {
                factor: name.into(),
                location,
                distance,
            },
            other => other,
        }
    }
}
