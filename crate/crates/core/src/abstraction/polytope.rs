use nalgebra::{DMatrix, DVector};

use crate::lp::{self, LinearProgram, LpOutcome};
use crate::scalar::Scalar;

/// `{z : a·z ≤ b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope<T: Scalar> {
    pub a: DMatrix<T>,
    pub b: DVector<T>,
}

impl<T: Scalar> Polytope<T> {
    pub fn new(a: DMatrix<T>, b: DVector<T>) -> Self {
        assert_eq!(a.nrows(), b.len(), "polytope rows");
        Polytope { a, b }
    }

    pub fn from_box(lo: &DVector<T>, hi: &DVector<T>) -> Self {
        let n = lo.len();
        let mut a = DMatrix::<T>::zeros(2 * n, n);
        let mut b = DVector::<T>::zeros(2 * n);
        for i in 0..n {
            a[(2 * i, i)] = T::one();
            b[2 * i] = hi[i];
            a[(2 * i + 1, i)] = -T::one();
            b[2 * i + 1] = -lo[i];
        }
        Polytope { a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Appends the half-space `cᵀz ≤ d`.
    pub fn push(&mut self, c: &DVector<T>, d: T) {
        let r = self.a.nrows();
        let a = std::mem::replace(&mut self.a, DMatrix::zeros(0, 0));
        self.a = a.insert_row(r, T::zero());
        for j in 0..c.len() {
            self.a[(r, j)] = c[j];
        }
        let b = std::mem::replace(&mut self.b, DVector::zeros(0));
        self.b = b.insert_row(r, d);
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let n = self.dim();
        let (r1, r2) = (self.a.nrows(), other.a.nrows());
        let mut a = DMatrix::<T>::zeros(r1 + r2, n);
        a.rows_mut(0, r1).copy_from(&self.a);
        a.rows_mut(r1, r2).copy_from(&other.a);
        let mut b = DVector::<T>::zeros(r1 + r2);
        b.rows_mut(0, r1).copy_from(&self.b);
        b.rows_mut(r1, r2).copy_from(&other.b);
        Polytope { a, b }
    }

    pub fn is_empty(&self) -> bool {
        !lp::is_feasible(&self.a, &self.b)
    }

    pub fn contains(&self, z: &DVector<T>, tol: T) -> bool {
        (&self.a * z - &self.b).iter().all(|&v| v <= tol)
    }

    /// Tight axis-aligned bounding box, or `None` if empty or unbounded.
    pub fn bounding_box(&self) -> Option<(DVector<T>, DVector<T>)> {
        let n = self.dim();
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for i in 0..n {
            for (sign, out) in [(T::one(), &mut lo), (-T::one(), &mut hi)] {
                let mut obj = DVector::zeros(n);
                obj[i] = sign;
                match LinearProgram::new(obj, self.a.clone(), self.b.clone()).solve() {
                    LpOutcome::Optimal { value, .. } => out[i] = sign * value,
                    _ => return None,
                }
            }
        }
        Some((lo, hi))
    }
}

/// Shared points exist, boundaries included, up to the LP tolerance.
pub fn polytopes_intersect<T: Scalar>(p: &Polytope<T>, q: &Polytope<T>) -> bool {
    !p.intersect(q).is_empty()
}

/// Some `z ∈ p`, `z' ∈ q` with `|z_i − z'_i| ≤ reach_i` for every `i`.
pub fn within_reach<T: Scalar>(p: &Polytope<T>, q: &Polytope<T>, reach: &DVector<T>) -> bool {
    let n = p.dim();
    let (rp, rq) = (p.a.nrows(), q.a.nrows());
    let rows = rp + rq + 2 * n;
    let mut a = DMatrix::<T>::zeros(rows, 2 * n);
    let mut b = DVector::<T>::zeros(rows);
    a.view_mut((0, 0), (rp, n)).copy_from(&p.a);
    b.rows_mut(0, rp).copy_from(&p.b);
    a.view_mut((rp, n), (rq, n)).copy_from(&q.a);
    b.rows_mut(rp, rq).copy_from(&q.b);
    for i in 0..n {
        let r = rp + rq + 2 * i;
        a[(r, i)] = T::one();
        a[(r, n + i)] = -T::one();
        b[r] = reach[i];
        a[(r + 1, i)] = -T::one();
        a[(r + 1, n + i)] = T::one();
        b[r + 1] = reach[i];
    }
    lp::is_feasible(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: f64, hi: f64) -> Polytope<f64> {
        Polytope::from_box(&DVector::from_element(1, lo), &DVector::from_element(1, hi))
    }

    #[test]
    fn disjoint_and_touching() {
        let bx = interval(-10.0, 10.0);
        let mut left = bx.clone();
        left.push(&DVector::from_element(1, 1.0), 0.0);
        let mut right = bx.clone();
        right.push(&DVector::from_element(1, -1.0), -1.0);
        assert!(!polytopes_intersect(&left, &right));
        let mut right0 = bx;
        right0.push(&DVector::from_element(1, -1.0), 0.0);
        assert!(polytopes_intersect(&left, &right0));
    }

    #[test]
    fn reach_bridges_gap() {
        let (p, q) = (interval(0.0, 1.0), interval(1.5, 2.0));
        assert!(!within_reach(&p, &q, &DVector::from_element(1, 0.4)));
        assert!(within_reach(&p, &q, &DVector::from_element(1, 0.5)));
    }

    #[test]
    fn bounding_box_of_triangle() {
        let p = Polytope::new(
            DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]),
            DVector::from_vec(vec![0.0, 0.0, 2.0]),
        );
        let (lo, hi) = p.bounding_box().unwrap();
        assert!((lo - DVector::from_vec(vec![0.0, 0.0])).amax() < 1e-12);
        assert!((hi - DVector::from_vec(vec![2.0, 2.0])).amax() < 1e-12);
    }
}
