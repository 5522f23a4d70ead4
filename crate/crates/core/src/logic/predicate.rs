use nalgebra::{DMatrix, DVector};

use super::quantile::normal_quantile;
use crate::belief::BeliefState;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Chance-constrained half-space `P(b - cᵀx ≥ 0) > 1 - eps`, or, when
/// `negated`, `P(cᵀx - b ≥ 0) > 1 - eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate<T: Scalar> {
    pub c: DVector<T>,
    pub b: T,
    pub eps: T,
    pub negated: bool,
}

impl<T: Scalar> Predicate<T> {
    pub fn new(c: DVector<T>, b: T, eps: T, negated: bool) -> Result<Self> {
        if !(eps > T::zero() && eps < T::of(0.5)) {
            return Err(Error::InvalidPredicate(format!("eps = {eps} must lie in (0, 0.5)")));
        }
        if c.iter().all(|&v| v == T::zero()) {
            return Err(Error::InvalidPredicate("c must not be the zero vector".into()));
        }
        if !b.is_finite() || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPredicate("non-finite coefficient".into()));
        }
        Ok(Predicate { c, b, eps, negated })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// The non-negated predicate sharing this half-space.
    pub fn base(&self) -> Self {
        Predicate {
            negated: false,
            ..self.clone()
        }
    }

    pub fn negate(&self) -> Self {
        Predicate {
            negated: !self.negated,
            ..self.clone()
        }
    }

    /// Same half-space and tolerance, regardless of negation.
    pub fn same_base(&self, other: &Self) -> bool {
        self.c == other.c && self.b == other.b && self.eps == other.eps
    }

    /// `(c', b')` such that the predicate reads `P(b' - c'ᵀx ≥ 0) > 1 - eps`.
    pub fn oriented(&self) -> (DVector<T>, T) {
        if self.negated {
            (-&self.c, -self.b)
        } else {
            (self.c.clone(), self.b)
        }
    }

    /// Φ⁻¹(1 - eps).
    pub fn quantile(&self) -> T {
        T::of(normal_quantile(1.0 - self.eps.f64()).expect("eps validated in (0, 0.5)"))
    }

    /// Effective right-hand side: the predicate holds iff `c'ᵀμ < b_eff`
    /// with `(c', b')` from [`Predicate::oriented`].
    pub fn chance_margin(&self, cov: &DMatrix<T>) -> Result<T> {
        if cov.nrows() != self.dim() || cov.ncols() != self.dim() {
            return Err(Error::Dimension {
                context: "chance_margin covariance",
                expected: self.dim(),
                found: cov.nrows(),
            });
        }
        linalg::check_psd(cov, "covariance")?;
        Ok(self.margin_unchecked(cov))
    }

    pub(crate) fn margin_unchecked(&self, cov: &DMatrix<T>) -> T {
        let (_, b) = self.oriented();
        b - self.quantile() * self.std_dev(cov)
    }

    /// `sqrt(cᵀΣc)`; identical for the predicate and its negation.
    pub fn std_dev(&self, cov: &DMatrix<T>) -> T {
        (cov * &self.c).dot(&self.c).max(T::zero()).sqrt()
    }

    /// Strict chance-constraint test on a Gaussian belief.
    pub fn holds(&self, belief: &BeliefState<T>) -> Result<bool> {
        if belief.dim() != self.dim() {
            return Err(Error::Dimension {
                context: "pred_holds",
                expected: self.dim(),
                found: belief.dim(),
            });
        }
        Ok(self.holds_unchecked(belief))
    }

    /// Deterministic test `b' - c'ᵀx ≥ 0` on a state.
    pub fn satisfied_by(&self, x: &DVector<T>) -> bool {
        let (c, b) = self.oriented();
        b - c.dot(x) >= T::zero()
    }

    pub(crate) fn holds_unchecked(&self, belief: &BeliefState<T>) -> bool {
        let (c, _) = self.oriented();
        c.dot(&belief.mean) < self.margin_unchecked(&belief.cov)
    }
}

pub fn chance_margin<T: Scalar>(pred: &Predicate<T>, cov: &DMatrix<T>) -> Result<T> {
    pred.chance_margin(cov)
}

pub fn pred_holds<T: Scalar>(pred: &Predicate<T>, belief: &BeliefState<T>) -> Result<bool> {
    pred.holds(belief)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(b: f64, eps: f64, negated: bool) -> Predicate<f64> {
        Predicate::new(DVector::from_vec(vec![1.0]), b, eps, negated).unwrap()
    }

    fn belief(m: f64, v: f64) -> BeliefState<f64> {
        BeliefState::new(DVector::from_vec(vec![m]), DMatrix::from_element(1, 1, v)).unwrap()
    }

    #[test]
    fn median_quantile_margin() {
        // eps = 0.5 is outside the constructor's range; build it directly.
        let p = Predicate {
            c: DVector::from_vec(vec![1.0]),
            b: 0.0,
            eps: 0.5,
            negated: false,
        };
        let m = p.chance_margin(&DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn zero_covariance_is_deterministic_half_space() {
        let m = p1(3.0, 0.05, false).chance_margin(&DMatrix::zeros(1, 1)).unwrap();
        assert_eq!(m, 3.0);
    }

    #[test]
    fn margin_with_variance_four() {
        let m = p1(3.0, 0.05, false)
            .chance_margin(&DMatrix::from_element(1, 1, 4.0))
            .unwrap();
        assert!((m - (3.0 - 2.0 * 1.6448536269514722)).abs() < 1e-12);
        assert!((m + 0.2897072539).abs() < 1e-9);
    }

    #[test]
    fn boundary_belief_is_rejected() {
        assert!(p1(3.0, 0.05, false).holds(&belief(0.0, 1.0)).unwrap());
        assert!(!p1(3.0, 0.05, false).holds(&belief(3.0, 0.0)).unwrap());
    }

    #[test]
    fn negated_predicate_mirrors() {
        assert!(p1(-3.0, 0.05, true).holds(&belief(0.0, 1.0)).unwrap());
        assert!(!p1(-3.0, 0.05, false).holds(&belief(0.0, 1.0)).unwrap());
    }

    #[test]
    fn rejects_bad_predicates() {
        assert!(Predicate::new(DVector::from_vec(vec![1.0]), 0.0, 0.5, false).is_err());
        assert!(Predicate::new(DVector::from_vec(vec![1.0]), 0.0, 0.0, false).is_err());
        assert!(Predicate::new(DVector::from_vec(vec![0.0, 0.0]), 0.0, 0.1, false).is_err());
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let p = Predicate::new(DVector::from_vec(vec![1.0, 0.0]), 0.0, 0.1, false).unwrap();
        assert!(matches!(p.chance_margin(&cov), Err(Error::NotPsd { .. })));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(p.chance_margin(&asym), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let p = Predicate::new(DVector::from_vec(vec![1.0, 0.0]), 0.0, 0.1, false).unwrap();
        assert!(matches!(p.holds(&belief(0.0, 1.0)), Err(Error::Dimension { .. })));
    }
}
