//! Small dense linear-algebra helpers for symmetric PSD matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalues above `-PSD_TOL` are treated as zero.
pub const PSD_TOL: f64 = 1e-9;

pub fn symmetrize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::of(0.5)
}

pub fn is_symmetric<T: Scalar>(m: &DMatrix<T>, tol: T) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol
}

pub fn min_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(T::max_value().unwrap(), |a, b| a.min(b))
}

/// Checks symmetry and positive semidefiniteness, naming `what` in the error.
pub fn check_psd<T: Scalar>(m: &DMatrix<T>, what: &str) -> Result<()> {
    let scale = T::one().max(m.amax());
    if !is_symmetric(m, T::of(1e-9) * scale) {
        return Err(Error::NotSymmetric(what.to_string()));
    }
    let lo = min_eigenvalue(m);
    if lo < -T::of(PSD_TOL) * scale {
        return Err(Error::NotPsd {
            what: what.to_string(),
            min_eigenvalue: lo.f64(),
        });
    }
    Ok(())
}

/// Symmetrizes and, only when some eigenvalue is negative, rebuilds the
/// matrix with negative eigenvalues set to zero.
pub fn clamp_psd<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let s = symmetrize(m);
    if s.nrows() == 0 {
        return s;
    }
    let eig = s.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= T::zero()) {
        return s;
    }
    let d = eig.eigenvalues.map(|l| l.max(T::zero()));
    let v = &eig.eigenvectors;
    symmetrize(&(v * DMatrix::from_diagonal(&d) * v.transpose()))
}

/// Symmetric square root through the eigendecomposition.
pub fn psd_sqrt<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    if m.nrows() == 0 {
        return m.clone();
    }
    let eig = symmetrize(m).symmetric_eigen();
    let d = eig.eigenvalues.map(|l| l.max(T::zero()).sqrt());
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&d) * v.transpose()
}

/// Lower Cholesky factor that tolerates semidefinite input: a pivot that
/// is not positive zeroes its column.
pub fn psd_cholesky<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let a = symmetrize(m);
    let mut l = DMatrix::<T>::zeros(n, n);
    let tiny = T::of(1e-14) * T::one().max(a.amax());
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tiny {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    l
}

/// True when `a ⪯ b + slack·I`.
pub fn psd_leq<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, slack: T) -> bool {
    let n = a.nrows();
    let diff = b - a + DMatrix::<T>::identity(n, n) * slack;
    min_eigenvalue(&diff) >= T::zero()
}

/// Row-major lower-triangular half-vectorization.
pub fn vech<T: Scalar>(l: &DMatrix<T>) -> DVector<T> {
    let n = l.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            out.push(l[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

pub fn unvech<T: Scalar>(v: &[T], n: usize) -> DMatrix<T> {
    let mut l = DMatrix::<T>::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in 0..=i {
            l[(i, j)] = v[idx];
            idx += 1;
        }
    }
    l
}

pub fn inf_norm<T: Scalar>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

pub fn mat_power<T: Scalar>(a: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let mut out = DMatrix::<T>::identity(a.nrows(), a.ncols());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

/// Largest eigenvalue modulus of a general square matrix.
pub fn spectral_radius<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| (z.re * z.re + z.im * z.im).sqrt())
        .fold(T::zero(), |a, b| a.max(b))
}

/// Numerical rank from the singular values, relative tolerance `rtol`.
pub fn rank<T: Scalar>(m: &DMatrix<T>, rtol: T) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    if top == T::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > top * rtol).count()
}
