use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid predicate: {0}")]
    InvalidPredicate(String),
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what} is not symmetric positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { what: String, min_eigenvalue: f64 },
    #[error("{0} is not symmetric")]
    NotSymmetric(String),
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("Riccati iteration did not converge after {iterations} iterations")]
    RiccatiDiverged { iterations: usize },
    #[error("controllability matrix has rank {rank}, need {required}")]
    Uncontrollable { rank: usize, required: usize },
    #[error("probability {0} outside (0, 1)")]
    QuantileDomain(f64),
    #[error("input set is empty or not full-dimensional")]
    EmptyInputSet,
    #[error("control violates the input set by {0:e}")]
    InputOutOfSet(f64),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("(A, B) is not stabilisable: uncontrollable mode with |eigenvalue| = {0}")]
    NotStabilisable(f64),
    #[error("scenario field `{field}`: {reason}")]
    Scenario { field: String, reason: String },
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn scenario(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Scenario {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
