use nalgebra::{DMatrix, DVector};

use crate::belief::{mlo_step_unchecked, BeliefState, InputSet, LinearSystem};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome};
use crate::scalar::Scalar;

pub const RICCATI_MAX_ITERS: usize = 10_000;

/// Infinite-horizon discrete LQR gain `F` (control law `u = −F·x`) from the
/// algebraic Riccati equation, solved by fixed-point iteration.
pub fn lqr<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, q: &DMatrix<T>, r: &DMatrix<T>) -> Result<DMatrix<T>> {
    let p = dare(a, b, q, r)?;
    let (_, f) = riccati_step(a, b, q, r, &p)?;
    if linalg::spectral_radius(&(a - b * &f)) >= T::one() {
        return Err(Error::RiccatiDiverged {
            iterations: RICCATI_MAX_ITERS,
        });
    }
    Ok(f)
}

/// One Riccati update of `p`, returning the new cost-to-go and the gain
/// computed from `p`.
fn riccati_step<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    q: &DMatrix<T>,
    r: &DMatrix<T>,
    p: &DMatrix<T>,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let bt_p = b.transpose() * p;
    let s = r + &bt_p * b;
    let s_inv = s.try_inverse().ok_or(Error::RiccatiDiverged { iterations: 0 })?;
    let f = s_inv * &bt_p * a;
    let closed = a - b * &f;
    let next = q + f.transpose() * r * &f + closed.transpose() * p * &closed;
    Ok((linalg::symmetrize(&next), f))
}

/// Residual of the algebraic Riccati equation at `p`.
pub fn dare_residual<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, q: &DMatrix<T>, r: &DMatrix<T>, p: &DMatrix<T>) -> T {
    match riccati_step(a, b, q, r, p) {
        Ok((next, _)) => (next - p).amax(),
        Err(_) => T::max_value().unwrap(),
    }
}

/// Cost-to-go matrix of [`lqr`].
pub fn dare<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, q: &DMatrix<T>, r: &DMatrix<T>) -> Result<DMatrix<T>> {
    let mut p = q.clone();
    let mut stalled = T::max_value().unwrap();
    for _ in 0..RICCATI_MAX_ITERS {
        let (next, _) = riccati_step(a, b, q, r, &p)?;
        let delta = (&next - &p).amax();
        stalled = stalled.min(delta / T::one().max(next.amax()));
        p = next;
        if delta <= T::of(1e-13) * T::one().max(p.amax()) {
            return Ok(p);
        }
    }
    // Badly conditioned problems stall at rounding noise.
    if stalled <= T::of(1e-8) {
        return Ok(p);
    }
    Err(Error::RiccatiDiverged {
        iterations: RICCATI_MAX_ITERS,
    })
}

/// Closest admissible control to `u_des` in the L1 sense.
pub fn clamp_control<T: Scalar>(u_des: &DVector<T>, set: &InputSet<T>) -> DVector<T> {
    if set.contains(u_des, T::zero()) {
        return u_des.clone();
    }
    if let Some((lo, hi)) = set.as_box() {
        return DVector::from_iterator(u_des.len(), (0..u_des.len()).map(|i| u_des[i].max(lo[i]).min(hi[i])));
    }
    clamp_control_lp(u_des, set)
}

/// LP form of [`clamp_control`]: variables `(u, t)`, minimize `Σ t` with
/// `|u − u_des| ≤ t` and `H·u ≥ c`.
pub fn clamp_control_lp<T: Scalar>(u_des: &DVector<T>, set: &InputSet<T>) -> DVector<T> {
    let m = u_des.len();
    let rows = set.h.nrows();
    let mut a = DMatrix::<T>::zeros(rows + 2 * m, 2 * m);
    let mut b = DVector::<T>::zeros(rows + 2 * m);
    for i in 0..rows {
        for j in 0..m {
            a[(i, j)] = -set.h[(i, j)];
        }
        b[i] = -set.c[i];
    }
    for j in 0..m {
        let r = rows + 2 * j;
        a[(r, j)] = T::one();
        a[(r, m + j)] = -T::one();
        b[r] = u_des[j];
        a[(r + 1, j)] = -T::one();
        a[(r + 1, m + j)] = -T::one();
        b[r + 1] = -u_des[j];
    }
    let mut obj = DVector::<T>::zeros(2 * m);
    for j in 0..m {
        obj[m + j] = T::one();
    }
    match LinearProgram::new(obj, a, b).solve() {
        LpOutcome::Optimal { x, .. } => x.rows(0, m).into_owned(),
        _ => set.chebyshev_center().map(|(c, _)| c).unwrap_or_else(|| u_des.clone()),
    }
}

/// `[A^{n−1}B, …, AB, B]`, matching the stacked control `[u₀; …; u_{n−1}]`.
pub fn loop_controllability<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (n, m) = (a.nrows(), b.ncols());
    let mut out = DMatrix::<T>::zeros(n, n * m);
    let mut blk = b.clone();
    for k in (0..n).rev() {
        out.view_mut((0, k * m), (n, m)).copy_from(&blk);
        blk = a * blk;
    }
    out
}

/// Controls steering the mean from `mu_near` to `mu_final` in `n` steps.
#[derive(Debug, Clone)]
pub struct LoopControls<T: Scalar> {
    /// Minimum-norm solution before clamping.
    pub raw: Vec<DVector<T>>,
    pub controls: Vec<DVector<T>>,
    /// `‖μ_n − μ_final‖∞` after clamping.
    pub residual: T,
}

pub fn loop_controls<T: Scalar>(
    sys: &LinearSystem<T>,
    mu_near: &DVector<T>,
    mu_final: &DVector<T>,
) -> Result<LoopControls<T>> {
    let (n, m) = (sys.n(), sys.m());
    let ctrb = loop_controllability(&sys.a, &sys.b);
    let rank = linalg::rank(&ctrb, T::of(1e-10));
    if rank < n {
        return Err(Error::Uncontrollable { rank, required: n });
    }
    let rhs = mu_final - linalg::mat_power(&sys.a, n) * mu_near;
    let pinv = ctrb
        .pseudo_inverse(T::of(1e-12))
        .map_err(|_| Error::Uncontrollable { rank, required: n })?;
    let stacked = pinv * rhs;
    let raw: Vec<DVector<T>> = (0..n).map(|k| stacked.rows(k * m, m).into_owned()).collect();
    let controls: Vec<DVector<T>> = raw.iter().map(|u| clamp_control(u, &sys.input_set)).collect();
    let mut mu = mu_near.clone();
    for u in &controls {
        mu = &sys.a * mu + &sys.b * u;
    }
    let residual = linalg::inf_norm(&(mu - mu_final));
    Ok(LoopControls {
        raw,
        controls,
        residual,
    })
}

/// Equilibrium `(x*, u*)` with `x* = A·x* + B·u*` closest to `target`,
/// when `u*` is admissible.
pub fn equilibrium<T: Scalar>(sys: &LinearSystem<T>, target: &DVector<T>) -> Option<(DVector<T>, DVector<T>)> {
    let (n, m) = (sys.n(), sys.m());
    let mut mat = DMatrix::<T>::zeros(n, n + m);
    mat.view_mut((0, 0), (n, n))
        .copy_from(&(&sys.a - DMatrix::<T>::identity(n, n)));
    mat.view_mut((0, n), (n, m)).copy_from(&sys.b);
    let u_weight = T::of(1e-6);
    let w_inv = DVector::from_iterator(
        n + m,
        (0..n + m).map(|i| if i < n { T::one() } else { T::one() / u_weight }),
    );
    let mw = DMatrix::from_fn(n, n + m, |i, j| mat[(i, j)] * w_inv[j]);
    let gram = (&mw * mat.transpose()).pseudo_inverse(T::of(1e-12)).ok()?;
    let mut z0 = DVector::zeros(n + m);
    z0.rows_mut(0, n).copy_from(target);
    let z = &z0 - mw.transpose() * (gram * (&mat * &z0));
    let (x, u) = (z.rows(0, n).into_owned(), z.rows(n, m).into_owned());
    let closed = (&sys.a * &x + &sys.b * &u - &x).amax();
    (closed <= T::of(1e-9) * T::one().max(x.amax()) && sys.input_set.contains(&u, T::zero())).then_some((x, u))
}

/// Augmented belief vector `[μ; vech(chol Σ)]`.
pub fn belief_vector<T: Scalar>(b: &BeliefState<T>) -> DVector<T> {
    let n = b.dim();
    let l = linalg::psd_cholesky(&b.cov);
    let v = linalg::vech(&l);
    let mut s = DVector::zeros(n + v.len());
    s.rows_mut(0, n).copy_from(&b.mean);
    s.rows_mut(n, v.len()).copy_from(&v);
    s
}

pub fn belief_from_vector<T: Scalar>(s: &DVector<T>, n: usize) -> BeliefState<T> {
    let l = linalg::unvech(&s.as_slice()[n..], n);
    BeliefState {
        mean: s.rows(0, n).into_owned(),
        cov: linalg::symmetrize(&(&l * l.transpose())),
    }
}

/// Central finite-difference Jacobians of the MLO step in augmented
/// coordinates, step `h`.
pub fn belief_jacobians<T: Scalar>(
    sys: &LinearSystem<T>,
    b: &BeliefState<T>,
    u: &DVector<T>,
    h: T,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let n = sys.n();
    let s0 = belief_vector(b);
    let dim = s0.len();
    let g = |s: &DVector<T>, u: &DVector<T>| -> Result<DVector<T>> {
        Ok(belief_vector(&mlo_step_unchecked(sys, &belief_from_vector(s, n), u)?))
    };
    let two_h = h + h;
    let mut ja = DMatrix::<T>::zeros(dim, dim);
    for i in 0..dim {
        let mut sp = s0.clone();
        let mut sm = s0.clone();
        sp[i] += h;
        sm[i] -= h;
        ja.set_column(i, &((g(&sp, u)? - g(&sm, u)?) / two_h));
    }
    let mut jb = DMatrix::<T>::zeros(dim, sys.m());
    for j in 0..sys.m() {
        let mut up = u.clone();
        let mut um = u.clone();
        up[j] += h;
        um[j] -= h;
        jb.set_column(j, &((g(&s0, &up)? - g(&s0, &um)?) / two_h));
    }
    Ok((ja, jb))
}

/// Stage and terminal weights on the augmented belief, and the control
/// weight.
#[derive(Debug, Clone)]
pub struct BlqrWeights<T: Scalar> {
    pub q: DMatrix<T>,
    pub q_f: DMatrix<T>,
    pub r: DMatrix<T>,
}

impl<T: Scalar> BlqrWeights<T> {
    /// Diagonal weights split into mean and covariance-factor blocks.
    pub fn diagonal(n: usize, m: usize, q_mean: T, q_cov: T, qf_mean: T, qf_cov: T, r: T) -> Self {
        let dim = n + n * (n + 1) / 2;
        let diag = |a: T, b: T| {
            DMatrix::from_fn(dim, dim, |i, j| {
                if i != j {
                    T::zero()
                } else if i < n {
                    a
                } else {
                    b
                }
            })
        };
        BlqrWeights {
            q: diag(q_mean, q_cov),
            q_f: diag(qf_mean, qf_cov),
            r: DMatrix::from_diagonal_element(m, m, r),
        }
    }
}

/// Time-varying gains `F₀…F_{T−1}` for the belief dynamics linearized
/// along a nominal run (`nominal.len() == controls.len() + 1`).
pub fn blqr<T: Scalar>(
    sys: &LinearSystem<T>,
    nominal: &[BeliefState<T>],
    controls: &[DVector<T>],
    weights: &BlqrWeights<T>,
) -> Result<Vec<DMatrix<T>>> {
    let t = controls.len();
    assert_eq!(nominal.len(), t + 1, "nominal run length");
    let mut jac = Vec::with_capacity(t);
    for k in 0..t {
        jac.push(belief_jacobians(sys, &nominal[k], &controls[k], T::of(1e-6))?);
    }
    let mut p = weights.q_f.clone();
    let mut gains = vec![DMatrix::zeros(0, 0); t];
    for k in (0..t).rev() {
        let (a, b) = &jac[k];
        let bt_p = b.transpose() * &p;
        let s = &weights.r + &bt_p * b;
        let s_inv = s.try_inverse().ok_or(Error::RiccatiDiverged { iterations: k })?;
        let f = s_inv * &bt_p * a;
        p = linalg::symmetrize(&(&weights.q + a.transpose() * &p * (a - b * &f)));
        gains[k] = f;
    }
    Ok(gains)
}
