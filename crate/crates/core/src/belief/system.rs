use nalgebra::{DMatrix, DVector};

use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome};
use crate::scalar::Scalar;

/// Input polytope `{u : H·u ≥ c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSet<T: Scalar> {
    pub h: DMatrix<T>,
    pub c: DVector<T>,
}

impl<T: Scalar> InputSet<T> {
    /// Requires a full-dimensional set (an interior point exists).
    pub fn new(h: DMatrix<T>, c: DVector<T>) -> Result<Self> {
        if h.nrows() != c.len() {
            return Err(Error::Dimension {
                context: "input set rows",
                expected: h.nrows(),
                found: c.len(),
            });
        }
        let set = InputSet { h, c };
        match set.chebyshev_center() {
            Some((_, r)) if r > T::of(1e-9) => Ok(set),
            _ => Err(Error::EmptyInputSet),
        }
    }

    /// Axis-aligned box `lo ≤ u ≤ hi`.
    pub fn bounds(lo: &[T], hi: &[T]) -> Result<Self> {
        let m = lo.len();
        let mut h = DMatrix::<T>::zeros(2 * m, m);
        let mut c = DVector::<T>::zeros(2 * m);
        for i in 0..m {
            h[(2 * i, i)] = T::one();
            c[2 * i] = lo[i];
            h[(2 * i + 1, i)] = -T::one();
            c[2 * i + 1] = -hi[i];
        }
        Self::new(h, c)
    }

    pub fn dim(&self) -> usize {
        self.h.ncols()
    }

    /// Largest constraint violation `max(c − H·u)`, or zero.
    pub fn violation(&self, u: &DVector<T>) -> T {
        let r = &self.c - &self.h * u;
        r.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    pub fn contains(&self, u: &DVector<T>, slack: T) -> bool {
        self.violation(u) <= slack
    }

    /// Per-coordinate bounds when every row constrains a single coordinate
    /// and every coordinate is bounded on both sides.
    pub fn as_box(&self) -> Option<(DVector<T>, DVector<T>)> {
        let m = self.dim();
        let mut lo = DVector::from_element(m, T::min_value()?);
        let mut hi = DVector::from_element(m, T::max_value()?);
        for i in 0..self.h.nrows() {
            let row = self.h.row(i);
            let mut nz = row.iter().enumerate().filter(|(_, v)| **v != T::zero());
            let (j, &hj) = nz.next()?;
            if nz.next().is_some() {
                return None;
            }
            let bound = self.c[i] / hj;
            if hj > T::zero() {
                lo[j] = lo[j].max(bound);
            } else {
                hi[j] = hi[j].min(bound);
            }
        }
        let unbounded = (0..m).any(|j| lo[j] == T::min_value().unwrap() || hi[j] == T::max_value().unwrap());
        (!unbounded).then_some((lo, hi))
    }

    /// Centre and radius (capped at 1) of the largest inscribed ball.
    pub fn chebyshev_center(&self) -> Option<(DVector<T>, T)> {
        let (rows, m) = self.h.shape();
        let mut a = DMatrix::<T>::zeros(rows + 1, m + 1);
        let mut b = DVector::<T>::zeros(rows + 1);
        for i in 0..rows {
            for j in 0..m {
                a[(i, j)] = -self.h[(i, j)];
            }
            a[(i, m)] = self.h.row(i).norm();
            b[i] = -self.c[i];
        }
        a[(rows, m)] = T::one();
        b[rows] = T::one();
        let mut obj = DVector::<T>::zeros(m + 1);
        obj[m] = -T::one();
        match LinearProgram::new(obj, a, b).solve() {
            LpOutcome::Optimal { x, .. } => Some((x.rows(0, m).into_owned(), x[m])),
            _ => None,
        }
    }
}

/// `x⁺ = A·x + B·u + w`, `y = C·x⁺ + v`, with `w ~ N(0, W)` and
/// `v ~ N(0, V(x⁺))`.
#[derive(Debug, Clone)]
pub struct LinearSystem<T: Scalar> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub w: DMatrix<T>,
    pub noise: NoiseModel<T>,
    pub input_set: InputSet<T>,
    pub(crate) w_sqrt: DMatrix<T>,
}

impl<T: Scalar> LinearSystem<T> {
    pub fn new(
        a: DMatrix<T>,
        b: DMatrix<T>,
        c: DMatrix<T>,
        w: DMatrix<T>,
        noise: NoiseModel<T>,
        input_set: InputSet<T>,
    ) -> Result<Self> {
        let n = a.nrows();
        let dim = |context, expected, found| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::Dimension {
                    context,
                    expected,
                    found,
                })
            }
        };
        dim("A columns", n, a.ncols())?;
        dim("B rows", n, b.nrows())?;
        dim("C columns", n, c.ncols())?;
        dim("W rows", n, w.nrows())?;
        dim("W columns", n, w.ncols())?;
        dim("noise outputs", c.nrows(), noise.outputs())?;
        dim("input set columns", b.ncols(), input_set.dim())?;
        linalg::check_psd(&w, "W")?;
        validate_noise(&noise, n)?;
        let sys = LinearSystem {
            w_sqrt: linalg::psd_sqrt(&w),
            a,
            b,
            c,
            w,
            noise,
            input_set,
        };
        sys.check_stabilisable()?;
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// `[B, AB, …, A^{n−1}B]`.
    pub fn controllability(&self) -> DMatrix<T> {
        let (n, m) = (self.n(), self.m());
        let mut out = DMatrix::<T>::zeros(n, n * m);
        let mut blk = self.b.clone();
        for k in 0..n {
            out.view_mut((0, k * m), (n, m)).copy_from(&blk);
            blk = &self.a * blk;
        }
        out
    }

    /// Every mode outside the controllable subspace must be strictly stable.
    pub fn check_stabilisable(&self) -> Result<()> {
        let n = self.n();
        let ctrb = self.controllability();
        let gram = linalg::symmetrize(&(&ctrb * ctrb.transpose()));
        let eig = gram.symmetric_eigen();
        let top = eig.eigenvalues.iter().copied().fold(T::zero(), |a, b| a.max(b));
        let cut = top * T::of(1e-10);
        let unctrl: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= cut).collect();
        if unctrl.is_empty() {
            return Ok(());
        }
        let mut u2 = DMatrix::<T>::zeros(n, unctrl.len());
        for (k, &i) in unctrl.iter().enumerate() {
            u2.set_column(k, &eig.eigenvectors.column(i));
        }
        let a22 = u2.transpose() * &self.a * &u2;
        let rho = linalg::spectral_radius(&a22);
        if rho >= T::one() {
            return Err(Error::NotStabilisable(rho.f64()));
        }
        Ok(())
    }
}

fn validate_noise<T: Scalar>(noise: &NoiseModel<T>, n: usize) -> Result<()> {
    match noise {
        NoiseModel::Constant(v) => linalg::check_psd(v, "V"),
        NoiseModel::MinOfConstAndPoly {
            var_const,
            var_min,
            terms,
        } => {
            if !(*var_min > T::zero() && *var_const > T::zero()) {
                return Err(Error::InvalidNoise("variances must be positive".into()));
            }
            for t in terms.iter().flatten() {
                if t.index >= n {
                    return Err(Error::InvalidNoise(format!(
                        "term index {} outside state dimension {n}",
                        t.index
                    )));
                }
                if t.coeff < T::zero() || t.power % 2 == 1 {
                    return Err(Error::InvalidNoise(
                        "terms need a non-negative coefficient and an even power".into(),
                    ));
                }
            }
            Ok(())
        }
    }
}
