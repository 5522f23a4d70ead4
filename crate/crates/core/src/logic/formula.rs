use std::fmt;

use super::predicate::Predicate;
use crate::belief::BeliefState;
use crate::scalar::Scalar;

/// Atomic proposition: a chance-constrained predicate, optionally carrying
/// the scenario name it was declared under.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom<T: Scalar> {
    pub name: Option<String>,
    pub pred: Predicate<T>,
}

/// Formula in negation normal form. `F φ` is stored as `true U φ` and
/// `G φ` as `false R φ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula<T: Scalar> {
    True,
    False,
    Atom(Atom<T>),
    And(Box<Formula<T>>, Box<Formula<T>>),
    Or(Box<Formula<T>>, Box<Formula<T>>),
    Until(Box<Formula<T>>, Box<Formula<T>>),
    Release(Box<Formula<T>>, Box<Formula<T>>),
}

impl<T: Scalar> Formula<T> {
    pub fn atom(pred: Predicate<T>) -> Self {
        Formula::Atom(Atom { name: None, pred })
    }

    pub fn named(name: &str, pred: Predicate<T>) -> Self {
        Formula::Atom(Atom {
            name: Some(name.to_string()),
            pred,
        })
    }

    pub fn and(a: Self, b: Self) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn until(a: Self, b: Self) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Self, b: Self) -> Self {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(a: Self) -> Self {
        Formula::until(Formula::True, a)
    }

    pub fn always(a: Self) -> Self {
        Formula::release(Formula::False, a)
    }

    pub fn is_temporal_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::And(a, b) | Formula::Or(a, b) => a.is_temporal_free() && b.is_temporal_free(),
            Formula::Until(..) | Formula::Release(..) => false,
        }
    }

    /// Nesting depth of temporal operators.
    pub fn temporal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::And(a, b) | Formula::Or(a, b) => a.temporal_depth().max(b.temporal_depth()),
            Formula::Until(a, b) | Formula::Release(a, b) => 1 + a.temporal_depth().max(b.temporal_depth()),
        }
    }

    /// Atoms in left-to-right order (with repetition).
    pub fn atoms(&self) -> Vec<&Atom<T>> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom<T>>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluates a temporal-free formula on a single belief.
    ///
    /// Panics if called on a formula with temporal operators.
    pub fn eval_state(&self, belief: &BeliefState<T>) -> bool {
        self.eval_with(&mut |atom| atom.pred.holds_unchecked(belief))
    }

    /// Evaluates a temporal-free formula with a caller-supplied atom oracle.
    pub fn eval_with(&self, atom_value: &mut dyn FnMut(&Atom<T>) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => atom_value(a),
            Formula::And(a, b) => a.eval_with(atom_value) && b.eval_with(atom_value),
            Formula::Or(a, b) => a.eval_with(atom_value) || b.eval_with(atom_value),
            Formula::Until(..) | Formula::Release(..) => {
                panic!("eval_with called on a temporal formula")
            }
        }
    }
}

impl<T: Scalar> fmt::Display for Atom<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pred.negated {
            write!(f, "!")?;
        }
        if let Some(name) = &self.name {
            return write!(f, "{name}");
        }
        write!(f, "p[{}](", self.pred.eps)?;
        let mut first = true;
        for (i, &ci) in self.pred.c.iter().enumerate() {
            if ci == T::zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*x{}", ci, i + 1)?;
        }
        write!(f, " <= {})", self.pred.b)
    }
}

impl<T: Scalar> fmt::Display for Formula<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Until(a, b) if **a == Formula::True => write!(f, "F {b}"),
            Formula::Release(a, b) if **a == Formula::False => write!(f, "G {b}"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
            Formula::Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}
