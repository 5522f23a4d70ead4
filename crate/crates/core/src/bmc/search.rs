use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ltl::Ltl;
use crate::abstraction::{Blocklist, Kripke, LabelMask};
use crate::logic::Skeleton;
use crate::scalar::Scalar;

/// Discrete plan `Q₀…Q_{L−1}(Q_L…Q_K)^ω` as cell ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LassoPath {
    pub cells: Vec<usize>,
    pub loop_index: usize,
}

impl LassoPath {
    /// `K`, the index of the last cell.
    pub fn k(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn is_path_in(&self, g: &LabelledGraph) -> bool {
        let ok = |a: usize, b: usize| g.successors[a].binary_search(&b).is_ok();
        !self.cells.is_empty()
            && self.cells[0] == g.initial
            && self.loop_index <= self.k()
            && self.cells.windows(2).all(|w| ok(w[0], w[1]))
            && ok(self.cells[self.k()], self.cells[self.loop_index])
    }
}

/// Initial state, sorted successor lists and label masks.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledGraph {
    pub initial: usize,
    pub successors: Vec<Vec<usize>>,
    pub labels: Vec<LabelMask>,
}

impl LabelledGraph {
    pub fn new(initial: usize, mut successors: Vec<Vec<usize>>, labels: Vec<LabelMask>) -> Self {
        for s in &mut successors {
            s.sort_unstable();
            s.dedup();
        }
        LabelledGraph {
            initial,
            successors,
            labels,
        }
    }

    /// A cycle is reachable from the initial state.
    pub fn has_lasso(&self) -> bool {
        let n = self.successors.len();
        let mut seen = vec![false; n];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.successors[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        // Colour-based cycle check restricted to reachable states.
        let mut colour = vec![0u8; n];
        fn visit(v: usize, g: &LabelledGraph, colour: &mut [u8]) -> bool {
            colour[v] = 1;
            for &w in &g.successors[v] {
                if colour[w] == 1 || (colour[w] == 0 && visit(w, g, colour)) {
                    return true;
                }
            }
            colour[v] = 2;
            false
        }
        (0..n).any(|v| seen[v] && colour[v] == 0 && visit(v, self, &mut colour))
    }
}

impl<T: Scalar> From<&Kripke<T>> for LabelledGraph {
    fn from(k: &Kripke<T>) -> Self {
        LabelledGraph::new(k.initial, k.successors.clone(), k.labels.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BmcOutcome {
    Found(LassoPath),
    /// No satisfying, unblocked lasso with `K ≤ k_max`.
    Exhausted,
    /// The graph has no lasso from its initial state at all.
    NoLasso,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum MemoKey {
    Prefix(usize, usize, Ltl),
    Loop(usize, usize, usize, Ltl, Vec<LabelMask>),
}

struct Search<'a> {
    g: &'a LabelledGraph,
    blocklist: &'a Blocklist,
    k: usize,
    l: usize,
    path: Vec<usize>,
    psi_l: Ltl,
    failed: HashSet<MemoKey>,
}

impl Search<'_> {
    /// Returns `(found, tainted)`; a tainted failure saw a blocked lasso
    /// and is not memoized.
    fn dfs(&mut self, d: usize, psi: Ltl) -> (bool, bool) {
        let q = self.path[d];
        if d == self.l {
            self.psi_l = psi.clone();
        }
        let key = if d < self.l {
            MemoKey::Prefix(d, q, psi.clone())
        } else {
            let loop_labels = self.path[self.l..=d].iter().map(|&c| self.g.labels[c]).collect();
            MemoKey::Loop(d, q, self.path[self.l], self.psi_l.clone(), loop_labels)
        };
        if self.failed.contains(&key) {
            return (false, false);
        }
        let next = psi.progress(self.g.labels[q]);
        if next == Ltl::False {
            self.failed.insert(key);
            return (false, false);
        }
        if d == self.k {
            let q_l = self.path[self.l];
            if self.g.successors[q].binary_search(&q_l).is_err() {
                self.failed.insert(key);
                return (false, false);
            }
            let loop_labels: Vec<LabelMask> = self.path[self.l..].iter().map(|&c| self.g.labels[c]).collect();
            if !self.psi_l.holds_on_lasso(&loop_labels, 0) {
                self.failed.insert(key);
                return (false, false);
            }
            if self.blocklist.contains(&self.path, self.l) {
                return (false, true);
            }
            return (true, false);
        }
        let mut tainted = false;
        for i in 0..self.g.successors[q].len() {
            let s = self.g.successors[q][i];
            self.path.push(s);
            let (found, t) = self.dfs(d + 1, next.clone());
            if found {
                return (true, false);
            }
            self.path.pop();
            tainted |= t;
        }
        if !tainted {
            self.failed.insert(key);
        }
        (false, tainted)
    }
}

/// Searches for a satisfying lasso outside `blocklist`, minimizing `K`,
/// then `L`, then the cell sequence lexicographically.
pub fn find_lasso(g: &LabelledGraph, skeleton: &Skeleton, k_max: usize, blocklist: &Blocklist) -> BmcOutcome {
    if !g.has_lasso() {
        return BmcOutcome::NoLasso;
    }
    let phi = Ltl::from_skeleton(skeleton);
    for k in 0..=k_max {
        for l in 0..=k {
            let mut s = Search {
                g,
                blocklist,
                k,
                l,
                path: vec![g.initial],
                psi_l: Ltl::True,
                failed: HashSet::new(),
            };
            if s.dfs(0, phi.clone()).0 {
                return BmcOutcome::Found(LassoPath {
                    cells: s.path,
                    loop_index: l,
                });
            }
        }
    }
    BmcOutcome::Exhausted
}

/// Convenience wrapper over a [`Kripke`] structure.
pub fn find_lasso_in<T: Scalar>(
    kripke: &Kripke<T>,
    skeleton: &Skeleton,
    k_max: usize,
    blocklist: &Blocklist,
) -> BmcOutcome {
    find_lasso(&LabelledGraph::from(kripke), skeleton, k_max, blocklist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> LabelledGraph {
        // a → b → b; p labels a only, AP 1 (¬p) labels b.
        LabelledGraph::new(0, vec![vec![1], vec![1]], vec![0b01, 0b10])
    }

    #[test]
    fn always_p_unsatisfiable() {
        let r = find_lasso(&two_state(), &Skeleton::always(Skeleton::Ap(0)), 4, &Blocklist::new());
        assert_eq!(r, BmcOutcome::Exhausted);
    }

    #[test]
    fn eventually_always_not_p() {
        let f = Skeleton::eventually(Skeleton::always(Skeleton::Ap(1)));
        let r = find_lasso(&two_state(), &f, 4, &Blocklist::new());
        assert_eq!(
            r,
            BmcOutcome::Found(LassoPath {
                cells: vec![0, 1],
                loop_index: 1
            })
        );
    }

    #[test]
    fn blocking_forces_next_lasso() {
        let g = two_state();
        let f = Skeleton::eventually(Skeleton::always(Skeleton::Ap(1)));
        let mut bl = Blocklist::new();
        let BmcOutcome::Found(first) = find_lasso(&g, &f, 4, &bl) else {
            panic!()
        };
        bl.block(&first);
        let BmcOutcome::Found(second) = find_lasso(&g, &f, 4, &bl) else {
            panic!()
        };
        assert_eq!(
            second,
            LassoPath {
                cells: vec![0, 1, 1],
                loop_index: 1
            }
        );
        assert!(second.is_path_in(&g));
    }

    #[test]
    fn dead_end_has_no_lasso() {
        let g = LabelledGraph::new(0, vec![vec![1], vec![]], vec![0, 0]);
        assert_eq!(
            find_lasso(&g, &Skeleton::True, 3, &Blocklist::new()),
            BmcOutcome::NoLasso
        );
    }
}
