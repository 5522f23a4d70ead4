use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::polytope::Polytope;
use crate::belief::BeliefState;
use crate::logic::{Formula, Predicate};
use crate::scalar::Scalar;

/// Three-valued truth of one base predicate on a belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "pos")]
    Pos,
    #[serde(rename = "neg")]
    Neg,
    #[serde(rename = "unknown")]
    Unknown,
}

/// A sign assignment over the base predicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub signs: Vec<Sign>,
}

/// Axis-aligned workspace box in mean space.
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace<T: Scalar> {
    pub lo: DVector<T>,
    pub hi: DVector<T>,
}

impl<T: Scalar> Workspace<T> {
    pub fn polytope(&self) -> Polytope<T> {
        Polytope::from_box(&self.lo, &self.hi)
    }

    pub fn contains(&self, z: &DVector<T>) -> bool {
        (0..z.len()).all(|i| z[i] >= self.lo[i] && z[i] <= self.hi[i])
    }
}

/// Distinct half-spaces underlying a set of atoms. `x ≥ b` atoms are stored
/// as negations of `x ≤ b` so each half-space appears once.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis<T: Scalar> {
    pub preds: Vec<Predicate<T>>,
}

/// Non-negated predicate with a positive leading coefficient, and whether
/// `pred` agrees with it (`true`) or with its negation.
fn canonical<T: Scalar>(pred: &Predicate<T>) -> (Predicate<T>, bool) {
    let lead = pred.c.iter().find(|v| **v != T::zero()).copied().unwrap_or(T::one());
    if lead > T::zero() {
        (pred.base(), !pred.negated)
    } else {
        let flipped = Predicate {
            c: -&pred.c,
            b: -pred.b,
            eps: pred.eps,
            negated: false,
        };
        (flipped, pred.negated)
    }
}

impl<T: Scalar> Basis<T> {
    pub fn from_formulas<'a>(formulas: impl IntoIterator<Item = &'a Formula<T>>) -> Self {
        let mut preds: Vec<Predicate<T>> = Vec::new();
        for f in formulas {
            for atom in f.atoms() {
                let (base, _) = canonical(&atom.pred);
                if !preds.iter().any(|p| p == &base) {
                    preds.push(base);
                }
            }
        }
        Basis { preds }
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    /// Index of the base predicate and the sign under which `pred` holds.
    pub fn locate(&self, pred: &Predicate<T>) -> Option<(usize, Sign)> {
        let (base, agrees) = canonical(pred);
        let idx = self.preds.iter().position(|p| p == &base)?;
        Some((idx, if agrees { Sign::Pos } else { Sign::Neg }))
    }

    pub fn abstract_belief(&self, b: &BeliefState<T>) -> Vec<Sign> {
        abstract_belief(b, &self.preds)
    }

    /// Evaluates a temporal-free formula on a sign vector; `Unknown`
    /// falsifies both an atom and its negation.
    pub fn eval_signs(&self, f: &Formula<T>, signs: &[Sign]) -> bool {
        f.eval_with(&mut |atom| match self.locate(&atom.pred) {
            Some((i, s)) => signs[i] == s,
            None => false,
        })
    }
}

/// Per-predicate sign of a belief.
pub fn abstract_belief<T: Scalar>(b: &BeliefState<T>, preds: &[Predicate<T>]) -> Vec<Sign> {
    preds
        .iter()
        .map(|p| {
            if p.holds_unchecked(b) {
                Sign::Pos
            } else if p.negate().holds_unchecked(b) {
                Sign::Neg
            } else {
                Sign::Unknown
            }
        })
        .collect()
}

/// Mean-space polytope containing every belief of the cell whose
/// covariance is bounded by `cov_max`.
pub fn enclosure<T: Scalar>(
    signs: &[Sign],
    preds: &[Predicate<T>],
    cov_max: &DMatrix<T>,
    workspace: &Workspace<T>,
) -> Polytope<T> {
    let mut poly = workspace.polytope();
    for (p, s) in preds.iter().zip(signs) {
        let (c, b) = p.base().oriented();
        match s {
            Sign::Pos => poly.push(&c, b),
            Sign::Neg => poly.push(&-&c, -b),
            Sign::Unknown => {
                let w = p.quantile() * p.std_dev(cov_max);
                poly.push(&c, b + w);
                poly.push(&-&c, -(b - w));
            }
        }
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(c: &[f64], b: f64, negated: bool) -> Predicate<f64> {
        Predicate::new(DVector::from_vec(c.to_vec()), b, 0.05, negated).unwrap()
    }

    fn ws1() -> Workspace<f64> {
        Workspace {
            lo: DVector::from_element(1, -10.0),
            hi: DVector::from_element(1, 10.0),
        }
    }

    #[test]
    fn ge_atoms_share_a_base() {
        let le = Formula::atom(pred(&[1.0], 3.0, false));
        let ge = Formula::atom(pred(&[-1.0], -3.0, false));
        let basis = Basis::from_formulas([&le, &ge]);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis.locate(&pred(&[-1.0], -3.0, false)), Some((0, Sign::Neg)));
        assert_eq!(basis.locate(&pred(&[-1.0], -3.0, true)), Some((0, Sign::Pos)));
    }

    #[test]
    fn signs_of_beliefs() {
        let preds = vec![pred(&[1.0], 3.0, false)];
        let tight = BeliefState::new(DVector::from_element(1, -5.0), DMatrix::from_element(1, 1, 1e-6)).unwrap();
        assert_eq!(abstract_belief(&tight, &preds), vec![Sign::Pos]);
        let on_plane = BeliefState::new(DVector::from_element(1, 3.0), DMatrix::from_element(1, 1, 0.1)).unwrap();
        assert_eq!(abstract_belief(&on_plane, &preds), vec![Sign::Unknown]);
    }

    #[test]
    fn pos_enclosure_is_relaxed_half_space() {
        let preds = vec![pred(&[1.0], 3.0, false)];
        let e = enclosure(&[Sign::Pos], &preds, &DMatrix::from_element(1, 1, 4.0), &ws1());
        let (lo, hi) = e.bounding_box().unwrap();
        assert!((lo[0] + 10.0).abs() < 1e-12 && (hi[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_enclosure_slab() {
        let preds = vec![pred(&[1.0], 3.0, false)];
        let e = enclosure(&[Sign::Unknown], &preds, &DMatrix::from_element(1, 1, 4.0), &ws1());
        let (lo, hi) = e.bounding_box().unwrap();
        let w = 2.0 * 1.6448536269514722;
        assert!((lo[0] - (3.0 - w)).abs() < 1e-9 && (hi[0] - (3.0 + w)).abs() < 1e-9);
    }

    #[test]
    fn contradictory_signs_empty() {
        let preds = vec![pred(&[1.0], 0.0, false), pred(&[1.0], 1.0, false)];
        // x ≤ 0 and x ≥ 1
        let e = enclosure(&[Sign::Pos, Sign::Neg], &preds, &DMatrix::zeros(1, 1), &ws1());
        assert!(e.is_empty());
    }
}
