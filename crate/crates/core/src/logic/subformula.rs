use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::Formula;
use crate::scalar::Scalar;

/// Temporal skeleton whose leaves are indices into an AP list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Skeleton {
    True,
    False,
    Ap(usize),
    And(Box<Skeleton>, Box<Skeleton>),
    Or(Box<Skeleton>, Box<Skeleton>),
    Until(Box<Skeleton>, Box<Skeleton>),
    Release(Box<Skeleton>, Box<Skeleton>),
}

impl Skeleton {
    pub fn and(a: Self, b: Self) -> Self {
        Skeleton::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        Skeleton::Or(Box::new(a), Box::new(b))
    }

    pub fn until(a: Self, b: Self) -> Self {
        Skeleton::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Self, b: Self) -> Self {
        Skeleton::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(a: Self) -> Self {
        Skeleton::until(Skeleton::True, a)
    }

    pub fn always(a: Self) -> Self {
        Skeleton::release(Skeleton::False, a)
    }

    pub fn depth(&self) -> usize {
        match self {
            Skeleton::True | Skeleton::False | Skeleton::Ap(_) => 0,
            Skeleton::And(a, b) | Skeleton::Or(a, b) => a.depth().max(b.depth()),
            Skeleton::Until(a, b) | Skeleton::Release(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Largest AP index referenced plus one.
    pub fn ap_count(&self) -> usize {
        match self {
            Skeleton::True | Skeleton::False => 0,
            Skeleton::Ap(i) => i + 1,
            Skeleton::And(a, b) | Skeleton::Or(a, b) | Skeleton::Until(a, b) | Skeleton::Release(a, b) => {
                a.ap_count().max(b.ap_count())
            }
        }
    }

    /// Replaces every AP leaf by the matching formula.
    pub fn substitute<T: Scalar>(&self, aps: &[Formula<T>]) -> Formula<T> {
        match self {
            Skeleton::True => Formula::True,
            Skeleton::False => Formula::False,
            Skeleton::Ap(i) => aps[*i].clone(),
            Skeleton::And(a, b) => Formula::and(a.substitute(aps), b.substitute(aps)),
            Skeleton::Or(a, b) => Formula::or(a.substitute(aps), b.substitute(aps)),
            Skeleton::Until(a, b) => Formula::until(a.substitute(aps), b.substitute(aps)),
            Skeleton::Release(a, b) => Formula::release(a.substitute(aps), b.substitute(aps)),
        }
    }
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Skeleton::True => write!(f, "true"),
            Skeleton::False => write!(f, "false"),
            Skeleton::Ap(i) => write!(f, "AP{}", i + 1),
            Skeleton::And(a, b) => write!(f, "({a} & {b})"),
            Skeleton::Or(a, b) => write!(f, "({a} | {b})"),
            Skeleton::Until(a, b) if **a == Skeleton::True => write!(f, "F {b}"),
            Skeleton::Release(a, b) if **a == Skeleton::False => write!(f, "G {b}"),
            Skeleton::Until(a, b) => write!(f, "({a} U {b})"),
            Skeleton::Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}

/// A formula split into temporal-free state formulas and a skeleton over them.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractedFormula<T: Scalar> {
    pub aps: Vec<Formula<T>>,
    pub skeleton: Skeleton,
}

impl<T: Scalar> AbstractedFormula<T> {
    pub fn reassemble(&self) -> Formula<T> {
        self.skeleton.substitute(&self.aps)
    }
}

/// Replaces each maximal temporal-free, non-constant subformula by an AP.
/// Structurally equal subformulas share one AP, numbered in order of first
/// appearance.
pub fn extract_subformulas<T: Scalar>(formula: &Formula<T>) -> AbstractedFormula<T> {
    let mut aps = Vec::new();
    let skeleton = walk(formula, &mut aps);
    AbstractedFormula { aps, skeleton }
}

fn walk<T: Scalar>(f: &Formula<T>, aps: &mut Vec<Formula<T>>) -> Skeleton {
    match f {
        Formula::True => Skeleton::True,
        Formula::False => Skeleton::False,
        _ if f.is_temporal_free() => {
            let idx = aps.iter().position(|g| g == f).unwrap_or_else(|| {
                aps.push(f.clone());
                aps.len() - 1
            });
            Skeleton::Ap(idx)
        }
        Formula::And(a, b) => Skeleton::and(walk(a, aps), walk(b, aps)),
        Formula::Or(a, b) => Skeleton::or(walk(a, aps), walk(b, aps)),
        Formula::Until(a, b) => Skeleton::until(walk(a, aps), walk(b, aps)),
        Formula::Release(a, b) => Skeleton::release(walk(a, aps), walk(b, aps)),
        Formula::Atom(_) => unreachable!("atoms are temporal-free"),
    }
}
