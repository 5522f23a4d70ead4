use std::cmp::Ordering;

use nalgebra::DVector;

use crate::belief::BeliefState;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Vertex<T: Scalar> {
    pub belief: BeliefState<T>,
    /// Lasso position this belief conforms to; the root has 0.
    pub progress: usize,
    /// Dynamics steps from the root.
    pub cost: usize,
    pub active: bool,
    pub parent: Option<usize>,
    /// Controls on the edge from the parent.
    pub controls: Vec<DVector<T>>,
    /// Lasso position of each belief reached along the edge.
    pub positions: Vec<usize>,
}

impl<T: Scalar> Vertex<T> {
    /// Orders by step count, then by covariance trace.
    pub fn cost_cmp(&self, other: &Self) -> Ordering {
        self.cost.cmp(&other.cost).then(
            self.belief
                .trace()
                .partial_cmp(&other.belief.trace())
                .unwrap_or(Ordering::Equal),
        )
    }

    /// Strictly better cost and at least as much progress.
    pub fn dominates(&self, other: &Self) -> bool {
        self.progress >= other.progress && self.cost_cmp(other) == Ordering::Less
    }
}

/// Sparse search tree over beliefs.
#[derive(Debug, Clone)]
pub struct SearchTree<T: Scalar> {
    pub vertices: Vec<Vertex<T>>,
}

impl<T: Scalar> SearchTree<T> {
    pub fn new(root: BeliefState<T>) -> Self {
        SearchTree {
            vertices: vec![Vertex {
                belief: root,
                progress: 0,
                cost: 0,
                active: true,
                parent: None,
                controls: Vec::new(),
                positions: Vec::new(),
            }],
        }
    }

    pub fn add(&mut self, v: Vertex<T>) -> usize {
        self.vertices.push(v);
        self.vertices.len() - 1
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&i| self.vertices[i].active)
    }

    /// Vertex ids from the root to `id`.
    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some(p) = self.vertices[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Controls and positions from the root to `id`.
    pub fn trace_to(&self, id: usize) -> (Vec<DVector<T>>, Vec<usize>) {
        let mut controls = Vec::new();
        let mut positions = vec![0];
        for v in self.path_to(id) {
            controls.extend(self.vertices[v].controls.iter().cloned());
            positions.extend(self.vertices[v].positions.iter().copied());
        }
        (controls, positions)
    }
}

/// Best-cost active vertex within `delta_near` of `target`, or the nearest
/// active vertex when none is in range.
pub fn best_nearest<T: Scalar>(
    tree: &SearchTree<T>,
    target: &BeliefState<T>,
    delta_near: T,
    w_cov: T,
) -> Option<usize> {
    let mut best_in: Option<usize> = None;
    let mut nearest: Option<(usize, T)> = None;
    for i in tree.active() {
        let v = &tree.vertices[i];
        let d = v.belief.distance(target, w_cov);
        if d <= delta_near && best_in.is_none_or(|b| v.cost_cmp(&tree.vertices[b]) == Ordering::Less) {
            best_in = Some(i);
        }
        if nearest.is_none_or(|(_, dn)| d < dn) {
            nearest = Some((i, d));
        }
    }
    best_in.or(nearest.map(|(i, _)| i))
}

/// Deactivates neighbours within `delta_drain` that the new vertex
/// dominates, and the new vertex itself if a neighbour dominates it.
pub fn drain<T: Scalar>(tree: &mut SearchTree<T>, new: usize, delta_drain: T, w_cov: T) {
    let mut dominated_self = false;
    let ids: Vec<usize> = tree.active().filter(|&i| i != new).collect();
    for i in ids {
        let (v, n) = (&tree.vertices[i], &tree.vertices[new]);
        if v.belief.distance(&n.belief, w_cov) > delta_drain {
            continue;
        }
        if n.dominates(v) {
            tree.vertices[i].active = false;
        } else if v.dominates(n) {
            dominated_self = true;
        }
    }
    if dominated_self {
        tree.vertices[new].active = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn b(x: f64) -> BeliefState<f64> {
        BeliefState::new(DVector::from_element(1, x), DMatrix::from_element(1, 1, 0.1)).unwrap()
    }

    fn vertex(x: f64, cost: usize, progress: usize) -> Vertex<f64> {
        Vertex {
            belief: b(x),
            progress,
            cost,
            active: true,
            parent: Some(0),
            controls: Vec::new(),
            positions: Vec::new(),
        }
    }

    #[test]
    fn prefers_cheaper_vertex_in_range() {
        let mut t = SearchTree::new(b(100.0));
        let far = t.add(vertex(0.4, 3, 0));
        let _near = t.add(vertex(0.1, 5, 0));
        assert_eq!(best_nearest(&t, &b(0.0), 0.5, 1.0), Some(far));
    }

    #[test]
    fn falls_back_to_nearest() {
        let mut t = SearchTree::new(b(100.0));
        t.add(vertex(5.0, 1, 0));
        let near = t.add(vertex(3.0, 9, 0));
        assert_eq!(best_nearest(&t, &b(0.0), 0.5, 1.0), Some(near));
    }

    #[test]
    fn drain_deactivates_dominated_neighbour() {
        let mut t = SearchTree::new(b(100.0));
        let old = t.add(vertex(0.0, 8, 1));
        let new = t.add(vertex(0.1, 4, 1));
        drain(&mut t, new, 0.25, 1.0);
        assert!(!t.vertices[old].active && t.vertices[new].active);
        let isolated = t.add(vertex(50.0, 100, 0));
        drain(&mut t, isolated, 0.25, 1.0);
        assert!(t.vertices[isolated].active);
    }
}
