use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// `coeff · (x[index] − shift)^power`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm<T: Scalar> {
    pub index: usize,
    pub shift: T,
    pub power: u32,
    pub coeff: T,
}

impl<T: Scalar> PolyTerm<T> {
    pub fn eval(&self, x: &DVector<T>) -> T {
        self.coeff * (x[self.index] - self.shift).powi(self.power as i32)
    }
}

/// Measurement noise covariance `V(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel<T: Scalar> {
    Constant(DMatrix<T>),
    /// Diagonal with entry `j` equal to
    /// `min(var_const, Σ terms[j](x) + var_min)`.
    MinOfConstAndPoly {
        var_const: T,
        var_min: T,
        terms: Vec<Vec<PolyTerm<T>>>,
    },
}

impl<T: Scalar> NoiseModel<T> {
    pub fn outputs(&self) -> usize {
        match self {
            NoiseModel::Constant(v) => v.nrows(),
            NoiseModel::MinOfConstAndPoly { terms, .. } => terms.len(),
        }
    }

    pub fn eval(&self, x: &DVector<T>) -> DMatrix<T> {
        match self {
            NoiseModel::Constant(v) => v.clone(),
            NoiseModel::MinOfConstAndPoly {
                var_const,
                var_min,
                terms,
            } => {
                let d = DVector::from_iterator(
                    terms.len(),
                    terms.iter().map(|row| {
                        let poly = row.iter().fold(T::zero(), |acc, t| acc + t.eval(x));
                        var_const.min(poly + *var_min)
                    }),
                );
                DMatrix::from_diagonal(&d)
            }
        }
    }

    /// Smallest value any diagonal entry can take, where known.
    pub fn floor(&self) -> Option<T> {
        match self {
            NoiseModel::Constant(_) => None,
            NoiseModel::MinOfConstAndPoly { var_const, var_min, .. } => Some(var_const.min(*var_min)),
        }
    }
}

pub fn noise_cov<T: Scalar>(model: &NoiseModel<T>, x: &DVector<T>) -> DMatrix<T> {
    model.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn camera(var_gps: f64, var_min: f64, yc: f64, zt: f64) -> NoiseModel<f64> {
        let row = vec![
            PolyTerm {
                index: 0,
                shift: yc,
                power: 4,
                coeff: 1.0,
            },
            PolyTerm {
                index: 1,
                shift: zt,
                power: 4,
                coeff: 1.0,
            },
        ];
        NoiseModel::MinOfConstAndPoly {
            var_const: var_gps,
            var_min,
            terms: vec![row.clone(), row],
        }
    }

    #[test]
    fn over_the_line_hits_floor() {
        let m = camera(4.0, 1e-3, 0.0, 8.0);
        let v = m.eval(&DVector::from_vec(vec![0.0, 8.0, 0.0, 0.0]));
        assert_eq!(v, DMatrix::from_diagonal_element(2, 2, 1e-3));
    }

    #[test]
    fn far_from_line_saturates() {
        let m = camera(4.0, 1e-3, 0.0, 8.0);
        // (−7)^4 + (7 − 8)^4 + 1e−3 = 2402.001 > 4
        let v = m.eval(&DVector::from_vec(vec![-7.0, 7.0, 0.0, 0.0]));
        assert_eq!(v, DMatrix::from_diagonal_element(2, 2, 4.0));
        // (0.5)^4 + (−0.5)^4 + 1e−3 = 0.126
        let v = m.eval(&DVector::from_vec(vec![0.5, 7.5, 0.0, 0.0]));
        assert!((v[(0, 0)] - 0.126).abs() < 1e-12);
    }

    #[test]
    fn constant_model() {
        let v0 = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let m = NoiseModel::Constant(v0.clone());
        assert_eq!(noise_cov(&m, &DVector::from_vec(vec![3.0, -1.0])), v0);
    }
}
