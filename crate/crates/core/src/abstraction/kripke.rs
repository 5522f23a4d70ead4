use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cells::{abstract_belief, enclosure, Basis, Cell, Sign, Workspace};
use super::polytope::{polytopes_intersect, within_reach, Polytope};
use crate::belief::{BeliefState, LinearSystem};
use crate::error::{Error, Result};
use crate::logic::{AbstractedFormula, Formula};
use crate::scalar::Scalar;

/// Label-set bitmask; bit `i` is AP `i`.
pub type LabelMask = u64;

pub const MAX_APS: usize = 64;

/// Finite abstraction of belief space over sign cells.
#[derive(Debug, Clone)]
pub struct Kripke<T: Scalar> {
    pub basis: Basis<T>,
    pub aps: Vec<Formula<T>>,
    pub cells: Vec<Cell>,
    pub enclosures: Vec<Polytope<T>>,
    pub labels: Vec<LabelMask>,
    pub successors: Vec<Vec<usize>>,
    pub initial: usize,
    pub pruned: usize,
    index: HashMap<Vec<Sign>, usize>,
}

/// Inputs that shape the abstraction besides the formula.
#[derive(Debug, Clone)]
pub struct AbstractionParams<T: Scalar> {
    pub cov_max: DMatrix<T>,
    pub workspace: Workspace<T>,
    /// Per-coordinate bound on one-step mean displacement. With `Some`,
    /// cells whose enclosures come within this distance are also linked,
    /// so a single dynamics step can never skip a transition.
    pub reach: Option<DVector<T>>,
}

/// Bound on `|((A − I)μ + B·u)_i|` over the workspace and input set, or
/// `None` when the input set is unbounded.
pub fn one_step_reach<T: Scalar>(sys: &LinearSystem<T>, ws: &Workspace<T>) -> Option<DVector<T>> {
    let input = Polytope::new(-&sys.input_set.h, -&sys.input_set.c);
    let (ulo, uhi) = input.bounding_box()?;
    let n = sys.n();
    let drift = &sys.a - DMatrix::<T>::identity(n, n);
    let mut reach = DVector::zeros(n);
    for i in 0..n {
        let mut r = T::zero();
        for j in 0..n {
            let d = drift[(i, j)];
            r += (d * ws.lo[j]).abs().max((d * ws.hi[j]).abs());
        }
        for j in 0..sys.m() {
            let bij = sys.b[(i, j)];
            r += (bij * ulo[j]).abs().max((bij * uhi[j]).abs());
        }
        reach[i] = r;
    }
    Some(reach)
}

fn all_sign_vectors(k: usize) -> Vec<Vec<Sign>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                [Sign::Pos, Sign::Neg, Sign::Unknown].into_iter().map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

impl<T: Scalar> Kripke<T> {
    pub fn build(spec: &AbstractedFormula<T>, b0: &BeliefState<T>, params: &AbstractionParams<T>) -> Result<Self> {
        if spec.aps.len() > MAX_APS {
            return Err(Error::scenario(
                "spec",
                format!("more than {MAX_APS} state subformulas"),
            ));
        }
        let basis = Basis::from_formulas(spec.aps.iter());
        let init_signs = abstract_belief(b0, &basis.preds);
        if !params.workspace.contains(&b0.mean) {
            return Err(Error::scenario("initial_belief", "mean lies outside the workspace box"));
        }

        let candidates = all_sign_vectors(basis.len());
        let total = candidates.len();
        let kept: Vec<(Vec<Sign>, Polytope<T>)> = candidates
            .into_par_iter()
            .filter_map(|signs| {
                let e = enclosure(&signs, &basis.preds, &params.cov_max, &params.workspace);
                (signs == init_signs || !e.is_empty()).then_some((signs, e))
            })
            .collect();
        let pruned = total - kept.len();

        let mut cells = Vec::with_capacity(kept.len());
        let mut enclosures = Vec::with_capacity(kept.len());
        let mut index = HashMap::new();
        for (id, (signs, e)) in kept.into_iter().enumerate() {
            index.insert(signs.clone(), id);
            cells.push(Cell { id, signs });
            enclosures.push(e);
        }
        let labels: Vec<LabelMask> = cells
            .iter()
            .map(|c| {
                spec.aps.iter().enumerate().fold(0, |m, (i, ap)| {
                    if basis.eval_signs(ap, &c.signs) {
                        m | (1 << i)
                    } else {
                        m
                    }
                })
            })
            .collect();
        let initial = index[&init_signs];

        let n = cells.len();
        let overlap = pair_matrix(n, |i, j| polytopes_intersect(&enclosures[i], &enclosures[j]));
        let near = match &params.reach {
            Some(r) => pair_matrix(n, |i, j| within_reach(&enclosures[i], &enclosures[j], r)),
            None => overlap.clone(),
        };
        // Each cell together with its same-label overlapping cells.
        let groups: Vec<Vec<usize>> = (0..n)
            .map(|q| {
                (0..n)
                    .filter(|&x| x == q || (labels[x] == labels[q] && overlap[q][x]))
                    .collect()
            })
            .collect();
        let successors: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|q| {
                (0..n)
                    .filter(|&r| groups[q].iter().any(|&x| groups[r].iter().any(|&y| near[x][y])))
                    .collect()
            })
            .collect();

        Ok(Kripke {
            basis,
            aps: spec.aps.clone(),
            cells,
            enclosures,
            labels,
            successors,
            initial,
            pruned,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_of_signs(&self, signs: &[Sign]) -> Option<usize> {
        self.index.get(signs).copied()
    }

    /// Cell containing `b`, if its sign vector survived pruning.
    pub fn cell_of(&self, b: &BeliefState<T>) -> Option<usize> {
        self.cell_of_signs(&self.basis.abstract_belief(b))
    }

    pub fn has_transition(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    pub fn label_set(&self, cell: usize) -> Vec<usize> {
        (0..self.aps.len())
            .filter(|i| self.labels[cell] & (1 << i) != 0)
            .collect()
    }

    /// Label of an arbitrary belief: APs that hold on it.
    pub fn belief_label(&self, b: &BeliefState<T>) -> LabelMask {
        self.aps
            .iter()
            .enumerate()
            .fold(0, |m, (i, ap)| if ap.eval_state(b) { m | (1 << i) } else { m })
    }

    pub fn dump(&self) -> KripkeDump {
        KripkeDump {
            format_version: KRIPKE_FORMAT_VERSION,
            predicates: self
                .basis
                .preds
                .iter()
                .map(|p| Formula::atom(p.clone()).to_string())
                .collect(),
            aps: self.aps.iter().map(|f| f.to_string()).collect(),
            cells: self
                .cells
                .iter()
                .map(|c| DumpCell {
                    id: c.id,
                    signs: c.signs.clone(),
                    label: self.label_set(c.id),
                })
                .collect(),
            transitions: self.successors.clone(),
            initial: self.initial,
            pruned: self.pruned,
        }
    }
}

fn pair_matrix(n: usize, test: impl Fn(usize, usize) -> bool + Sync) -> Vec<Vec<bool>> {
    let upper: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| test(i, j)).collect())
        .collect();
    let mut m = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i..n {
            m[i][j] = upper[i][j - i];
            m[j][i] = upper[i][j - i];
        }
    }
    m
}

pub const KRIPKE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpCell {
    pub id: usize,
    pub signs: Vec<Sign>,
    pub label: Vec<usize>,
}

/// Serializable view of a [`Kripke`] structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KripkeDump {
    pub format_version: u32,
    pub predicates: Vec<String>,
    pub aps: Vec<String>,
    pub cells: Vec<DumpCell>,
    pub transitions: Vec<Vec<usize>>,
    pub initial: usize,
    pub pruned: usize,
}
