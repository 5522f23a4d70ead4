use crate::abstraction::LabelMask;
use crate::logic::Skeleton;

/// Skeleton formula in a canonical form: `And`/`Or` are flattened, sorted
/// and deduplicated, with constants absorbed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ltl {
    False,
    True,
    Ap(usize),
    And(Vec<Ltl>),
    Or(Vec<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Release(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn from_skeleton(s: &Skeleton) -> Ltl {
        match s {
            Skeleton::True => Ltl::True,
            Skeleton::False => Ltl::False,
            Skeleton::Ap(i) => Ltl::Ap(*i),
            Skeleton::And(a, b) => Ltl::and(vec![Ltl::from_skeleton(a), Ltl::from_skeleton(b)]),
            Skeleton::Or(a, b) => Ltl::or(vec![Ltl::from_skeleton(a), Ltl::from_skeleton(b)]),
            Skeleton::Until(a, b) => Ltl::Until(Box::new(Ltl::from_skeleton(a)), Box::new(Ltl::from_skeleton(b))),
            Skeleton::Release(a, b) => Ltl::Release(Box::new(Ltl::from_skeleton(a)), Box::new(Ltl::from_skeleton(b))),
        }
    }

    pub fn and(parts: Vec<Ltl>) -> Ltl {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Ltl::True => {}
                Ltl::False => return Ltl::False,
                Ltl::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Ltl::True,
            1 => flat.pop().unwrap(),
            _ => Ltl::And(flat),
        }
    }

    pub fn or(parts: Vec<Ltl>) -> Ltl {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Ltl::False => {}
                Ltl::True => return Ltl::True,
                Ltl::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Ltl::False,
            1 => flat.pop().unwrap(),
            _ => Ltl::Or(flat),
        }
    }

    /// Obligation left for the suffix after reading one letter.
    pub fn progress(&self, label: LabelMask) -> Ltl {
        match self {
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::False,
            Ltl::Ap(i) => {
                if label & (1 << i) != 0 {
                    Ltl::True
                } else {
                    Ltl::False
                }
            }
            Ltl::And(v) => Ltl::and(v.iter().map(|f| f.progress(label)).collect()),
            Ltl::Or(v) => Ltl::or(v.iter().map(|f| f.progress(label)).collect()),
            Ltl::Until(a, b) => Ltl::or(vec![b.progress(label), Ltl::and(vec![a.progress(label), self.clone()])]),
            Ltl::Release(a, b) => Ltl::and(vec![b.progress(label), Ltl::or(vec![a.progress(label), self.clone()])]),
        }
    }

    /// Truth of the formula at every position of the lasso word
    /// `labels[..loop_index] · (labels[loop_index..])^ω`.
    pub fn eval_positions(&self, labels: &[LabelMask], loop_index: usize) -> Vec<bool> {
        let k = labels.len();
        assert!(loop_index < k, "loop index out of range");
        let succ = |i: usize| if i + 1 < k { i + 1 } else { loop_index };
        match self {
            Ltl::True => vec![true; k],
            Ltl::False => vec![false; k],
            Ltl::Ap(a) => labels.iter().map(|l| l & (1 << a) != 0).collect(),
            Ltl::And(v) => v.iter().fold(vec![true; k], |acc, f| {
                let x = f.eval_positions(labels, loop_index);
                acc.iter().zip(x).map(|(p, q)| *p && q).collect()
            }),
            Ltl::Or(v) => v.iter().fold(vec![false; k], |acc, f| {
                let x = f.eval_positions(labels, loop_index);
                acc.iter().zip(x).map(|(p, q)| *p || q).collect()
            }),
            Ltl::Until(a, b) | Ltl::Release(a, b) => {
                let until = matches!(self, Ltl::Until(..));
                let va = a.eval_positions(labels, loop_index);
                let vb = b.eval_positions(labels, loop_index);
                // Least fixpoint for U, greatest for R.
                let mut val = vec![!until; k];
                loop {
                    let mut changed = false;
                    for i in (0..k).rev() {
                        let next = val[succ(i)];
                        let v = if until {
                            vb[i] || (va[i] && next)
                        } else {
                            vb[i] && (va[i] || next)
                        };
                        if v != val[i] {
                            val[i] = v;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                val
            }
        }
    }

    pub fn holds_on_lasso(&self, labels: &[LabelMask], loop_index: usize) -> bool {
        self.eval_positions(labels, loop_index)[0]
    }
}

/// Whether the lasso word over `labels` (length `K + 1`, loop back to
/// `loop_index`) satisfies the skeleton.
pub fn eval_on_lasso(skeleton: &Skeleton, labels: &[LabelMask], loop_index: usize) -> bool {
    Ltl::from_skeleton(skeleton).holds_on_lasso(labels, loop_index)
}
