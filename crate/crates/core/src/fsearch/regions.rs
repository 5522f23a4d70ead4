use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::abstraction::{Kripke, LabelMask, Polytope, Workspace};
use crate::belief::BeliefState;
use crate::bmc::LassoPath;
use crate::logic::Formula;
use crate::scalar::Scalar;

const REJECTION_BUDGET: usize = 10_000;

struct Member<T: Scalar> {
    poly: Polytope<T>,
    lo: DVector<T>,
    hi: DVector<T>,
    volume: f64,
}

/// Mean-space regions for each lasso position. A belief conforms to
/// position `k` when it lies in the workspace and every AP in the label of
/// the `k`-th lasso cell holds on it.
pub struct Regions<T: Scalar> {
    pub masks: Vec<LabelMask>,
    pub loop_index: usize,
    aps: Vec<Formula<T>>,
    workspace: Workspace<T>,
    members: Vec<Vec<Member<T>>>,
}

impl<T: Scalar> Regions<T> {
    pub fn new(kripke: &Kripke<T>, lasso: &LassoPath, workspace: &Workspace<T>) -> Self {
        let masks: Vec<LabelMask> = lasso.cells.iter().map(|&c| kripke.labels[c]).collect();
        let members = masks
            .iter()
            .map(|&mask| {
                (0..kripke.len())
                    .filter(|&c| kripke.labels[c] & mask == mask)
                    .filter_map(|c| {
                        let poly = kripke.enclosures[c].clone();
                        let (lo, hi) = poly.bounding_box()?;
                        let volume = (0..lo.len()).map(|i| (hi[i] - lo[i]).f64().max(0.0)).product::<f64>();
                        (volume > 0.0).then_some(Member { poly, lo, hi, volume })
                    })
                    .collect()
            })
            .collect();
        Regions {
            masks,
            loop_index: lasso.loop_index,
            aps: kripke.aps.clone(),
            workspace: workspace.clone(),
            members,
        }
    }

    /// `K`, the last position.
    pub fn last(&self) -> usize {
        self.masks.len() - 1
    }

    pub fn label(&self, b: &BeliefState<T>) -> LabelMask {
        self.aps
            .iter()
            .enumerate()
            .fold(0, |m, (i, ap)| if ap.eval_state(b) { m | (1 << i) } else { m })
    }

    pub fn conforms(&self, b: &BeliefState<T>, k: usize) -> bool {
        self.workspace.contains(&b.mean) && self.label(b) & self.masks[k] == self.masks[k]
    }

    /// Whether position `k` has positive sampling measure.
    pub fn has_measure(&self, k: usize) -> bool {
        !self.members[k].is_empty()
    }

    /// Uniform draw from one member enclosure of position `k`, chosen by
    /// bounding-box volume; `None` when the budget runs out.
    pub fn sample_mean<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Option<DVector<T>> {
        let members = &self.members[k];
        if members.is_empty() {
            return None;
        }
        let total: f64 = members.iter().map(|m| m.volume).sum();
        for _ in 0..REJECTION_BUDGET {
            let mut pick = rng.random::<f64>() * total;
            let mut chosen = &members[members.len() - 1];
            for m in members {
                if pick < m.volume {
                    chosen = m;
                    break;
                }
                pick -= m.volume;
            }
            let z = DVector::from_iterator(
                chosen.lo.len(),
                (0..chosen.lo.len()).map(|i| chosen.lo[i] + (chosen.hi[i] - chosen.lo[i]) * T::of(rng.random::<f64>())),
            );
            if chosen.poly.contains(&z, T::zero()) {
                return Some(z);
            }
        }
        None
    }

    /// Region index drawn with weight `1 / (1 + occupancy)`, skipping
    /// regions without measure.
    pub fn pick_region<R: Rng + ?Sized>(&self, occupancy: &[usize], rng: &mut R) -> Option<usize> {
        let weights: Vec<f64> = (0..self.masks.len())
            .map(|k| {
                if self.has_measure(k) {
                    1.0 / (1.0 + occupancy[k] as f64)
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut pick = rng.random::<f64>() * total;
        for (k, w) in weights.iter().enumerate() {
            if *w > 0.0 && pick < *w {
                return Some(k);
            }
            pick -= w;
        }
        weights.iter().rposition(|w| *w > 0.0)
    }

    /// Random belief for tree growth: region by inverse occupancy, mean
    /// uniform in the region, covariance `λ·cov_max`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        active: &[&BeliefState<T>],
        cov_max: &DMatrix<T>,
        rng: &mut R,
    ) -> Option<BeliefState<T>> {
        let occupancy: Vec<usize> = (0..self.masks.len())
            .map(|k| active.iter().filter(|b| self.conforms(b, k)).count())
            .collect();
        let k = self.pick_region(&occupancy, rng)?;
        let lambda = T::of(rng.random::<f64>());
        let mean = match self.sample_mean(k, rng) {
            Some(m) => m,
            None => {
                let base = active[rng.random_range(0..active.len())];
                let jitter =
                    DVector::from_iterator(base.dim(), (0..base.dim()).map(|_| T::of(rng.random::<f64>() - 0.5)));
                &base.mean + jitter
            }
        };
        Some(BeliefState {
            mean,
            cov: cov_max * lambda,
        })
    }
}
