use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::state::BeliefState;
use super::system::LinearSystem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Slack allowed on input constraints.
pub const INPUT_SLACK: f64 = 1e-9;

fn check_step<T: Scalar>(sys: &LinearSystem<T>, b: &BeliefState<T>, u: &DVector<T>) -> Result<()> {
    if b.dim() != sys.n() {
        return Err(Error::Dimension {
            context: "belief dimension",
            expected: sys.n(),
            found: b.dim(),
        });
    }
    if u.len() != sys.m() {
        return Err(Error::Dimension {
            context: "control dimension",
            expected: sys.m(),
            found: u.len(),
        });
    }
    let viol = sys.input_set.violation(u);
    if viol > T::of(INPUT_SLACK) {
        return Err(Error::InputOutOfSet(viol.f64()));
    }
    Ok(())
}

/// Predicted mean, posterior covariance and Kalman gain for one step.
fn covariance_step<T: Scalar>(
    sys: &LinearSystem<T>,
    b: &BeliefState<T>,
    u: &DVector<T>,
) -> Result<(DVector<T>, DMatrix<T>, DMatrix<T>)> {
    let f = &sys.a * &b.mean + &sys.b * u;
    let gamma = &sys.a * &b.cov * sys.a.transpose() + &sys.w;
    if sys.p() == 0 {
        return Ok((f, linalg::clamp_psd(&gamma), DMatrix::zeros(sys.n(), 0)));
    }
    let v = sys.noise.eval(&f);
    let s = linalg::symmetrize(&(&sys.c * &gamma * sys.c.transpose() + v));
    let eig = s.clone().symmetric_eigenvalues();
    let hi = eig.iter().copied().fold(T::zero(), |a, b| a.max(b.abs()));
    let lo = eig.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    if hi.partial_cmp(&T::zero()) != Some(Ordering::Greater) || lo <= hi * T::of(1e-12) {
        return Err(Error::SingularInnovation);
    }
    let s_inv = s.cholesky().ok_or(Error::SingularInnovation)?.inverse();
    let k = &gamma * sys.c.transpose() * s_inv;
    let cov = &gamma - &k * &sys.c * &gamma;
    Ok((f, linalg::clamp_psd(&cov), k))
}

/// Kalman filter step with observation `y`; measurement noise is evaluated
/// at the predicted mean.
pub fn kalman_update<T: Scalar>(
    sys: &LinearSystem<T>,
    b: &BeliefState<T>,
    u: &DVector<T>,
    y: &DVector<T>,
) -> Result<BeliefState<T>> {
    check_step(sys, b, u)?;
    if y.len() != sys.p() {
        return Err(Error::Dimension {
            context: "observation dimension",
            expected: sys.p(),
            found: y.len(),
        });
    }
    let (f, cov, k) = covariance_step(sys, b, u)?;
    let innov = y - &sys.c * &f;
    let mean = &f + k * innov;
    Ok(BeliefState::from_parts(mean, cov))
}

/// Belief step under the maximum-likelihood observation: the mean follows
/// the noiseless dynamics, the covariance the Kalman recursion.
pub fn mlo_step<T: Scalar>(sys: &LinearSystem<T>, b: &BeliefState<T>, u: &DVector<T>) -> Result<BeliefState<T>> {
    check_step(sys, b, u)?;
    let (f, cov, _) = covariance_step(sys, b, u)?;
    Ok(BeliefState::from_parts(f, cov))
}

/// [`mlo_step`] without dimension or input-set checks.
pub(crate) fn mlo_step_unchecked<T: Scalar>(
    sys: &LinearSystem<T>,
    b: &BeliefState<T>,
    u: &DVector<T>,
) -> Result<BeliefState<T>> {
    let (f, cov, _) = covariance_step(sys, b, u)?;
    Ok(BeliefState::from_parts(f, cov))
}

/// Folds [`mlo_step`] over a control sequence, returning every belief
/// including the first.
pub fn mlo_rollout<T: Scalar>(
    sys: &LinearSystem<T>,
    b0: &BeliefState<T>,
    controls: &[DVector<T>],
) -> Result<Vec<BeliefState<T>>> {
    let mut out = Vec::with_capacity(controls.len() + 1);
    out.push(b0.clone());
    for u in controls {
        let next = mlo_step(sys, out.last().unwrap(), u)?;
        out.push(next);
    }
    Ok(out)
}

fn std_normal<T: Scalar, R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<T> {
    DVector::from_iterator(len, (0..len).map(|_| T::of(rng.sample::<f64, _>(StandardNormal))))
}

/// Samples the true next state and its observation.
pub fn simulate_step<T: Scalar, R: Rng + ?Sized>(
    sys: &LinearSystem<T>,
    x: &DVector<T>,
    u: &DVector<T>,
    rng: &mut R,
) -> (DVector<T>, DVector<T>) {
    let w = std_normal::<T, R>(sys.n(), rng);
    let x_next = &sys.a * x + &sys.b * u + &sys.w_sqrt * w;
    let v = sys.noise.eval(&x_next);
    let diagonal = (0..v.nrows()).all(|i| (0..v.ncols()).all(|j| i == j || v[(i, j)] == T::zero()));
    let v_sqrt = if diagonal {
        DMatrix::from_diagonal(&v.diagonal().map(|d| d.max(T::zero()).sqrt()))
    } else {
        linalg::psd_sqrt(&v)
    };
    let e = std_normal::<T, R>(sys.p(), rng);
    let y = &sys.c * &x_next + v_sqrt * e;
    (x_next, y)
}

/// Draws `x ~ N(mean, cov)`.
pub fn sample_state<T: Scalar, R: Rng + ?Sized>(b: &BeliefState<T>, rng: &mut R) -> DVector<T> {
    let l = linalg::psd_cholesky(&b.cov);
    &b.mean + l * std_normal::<T, R>(b.dim(), rng)
}
