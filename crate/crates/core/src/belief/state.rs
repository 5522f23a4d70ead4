use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Gaussian belief `N(mean, cov)` over the system state.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState<T: Scalar> {
    pub mean: DVector<T>,
    pub cov: DMatrix<T>,
}

impl<T: Scalar> BeliefState<T> {
    /// Validates shape and positive semidefiniteness; the stored covariance
    /// is symmetrized with tiny negative eigenvalues clamped to zero.
    pub fn new(mean: DVector<T>, cov: DMatrix<T>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::Dimension {
                context: "belief covariance",
                expected: mean.len(),
                found: cov.nrows(),
            });
        }
        linalg::check_psd(&cov, "belief covariance")?;
        Ok(BeliefState {
            mean,
            cov: linalg::clamp_psd(&cov),
        })
    }

    pub(crate) fn from_parts(mean: DVector<T>, cov: DMatrix<T>) -> Self {
        BeliefState { mean, cov }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn trace(&self) -> T {
        self.cov.trace()
    }

    /// `‖μ − μ'‖₂ + w·‖Σ − Σ'‖_F`.
    pub fn distance(&self, other: &Self, w_cov: T) -> T {
        (&self.mean - &other.mean).norm() + w_cov * (&self.cov - &other.cov).norm()
    }
}
