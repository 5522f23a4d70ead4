#![allow(dead_code)]

use std::path::PathBuf;

use beliefplan::abstraction::LabelMask;
use beliefplan::belief::mlo_step;
use beliefplan::bmc::LabelledGraph;
use beliefplan::linalg;
use beliefplan::logic::Skeleton;
use beliefplan::scenario::load_scenario;
use beliefplan::synth::Problem;
use beliefplan::{BeliefState, Scenario};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"))
}

pub fn scenario(name: &str) -> Scenario {
    load_scenario(scenario_path(name)).unwrap()
}

/// Naive fixpoint evaluation on a lasso-shaped word whose last position
/// is followed by `loop_start`.
fn eval_word(s: &Skeleton, word: &[LabelMask], loop_start: usize) -> Vec<bool> {
    let n = word.len();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { loop_start };
    let fixpoint = |init: bool, step: &dyn Fn(usize, &[bool]) -> bool| {
        let mut v = vec![init; n];
        loop {
            let next: Vec<bool> = (0..n).map(|i| step(i, &v)).collect();
            if next == v {
                return v;
            }
            v = next;
        }
    };
    match s {
        Skeleton::True => vec![true; n],
        Skeleton::False => vec![false; n],
        Skeleton::Ap(i) => word.iter().map(|m| m & (1 << i) != 0).collect(),
        Skeleton::And(a, b) => {
            let (a, b) = (eval_word(a, word, loop_start), eval_word(b, word, loop_start));
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        Skeleton::Or(a, b) => {
            let (a, b) = (eval_word(a, word, loop_start), eval_word(b, word, loop_start));
            a.iter().zip(&b).map(|(x, y)| *x || *y).collect()
        }
        Skeleton::Until(a, b) => {
            let (a, b) = (eval_word(a, word, loop_start), eval_word(b, word, loop_start));
            fixpoint(false, &|i, v| b[i] || (a[i] && v[succ(i)]))
        }
        Skeleton::Release(a, b) => {
            let (a, b) = (eval_word(a, word, loop_start), eval_word(b, word, loop_start));
            fixpoint(true, &|i, v| b[i] && (a[i] || v[succ(i)]))
        }
    }
}

/// Truth of the skeleton on `labels[..L] · labels[L..]^ω`, evaluated on a
/// copy with the loop unrolled several times.
pub fn unrolled_oracle(s: &Skeleton, labels: &[LabelMask], loop_index: usize) -> bool {
    let k = labels.len() - 1;
    let reps = 2 * (k + 1) * (s.depth() + 1);
    let mut word = labels[..loop_index].to_vec();
    for _ in 0..reps {
        word.extend_from_slice(&labels[loop_index..]);
    }
    let loop_start = word.len() - (k + 1 - loop_index);
    eval_word(s, &word, loop_start)[0]
}

/// Smallest `K ≤ k_max` admitting a satisfying lasso, by enumerating every
/// path from the initial state.
pub fn min_lasso_k(g: &LabelledGraph, s: &Skeleton, k_max: usize) -> Option<usize> {
    fn extend(g: &LabelledGraph, s: &Skeleton, path: &mut Vec<usize>, k: usize) -> bool {
        if path.len() == k + 1 {
            let last = path[k];
            let labels: Vec<LabelMask> = path.iter().map(|&q| g.labels[q]).collect();
            return (0..=k).any(|l| g.successors[last].contains(&path[l]) && unrolled_oracle(s, &labels, l));
        }
        let q = *path.last().unwrap();
        for &r in &g.successors[q] {
            path.push(r);
            if extend(g, s, path, k) {
                return true;
            }
            path.pop();
        }
        false
    }
    (0..=k_max).find(|&k| extend(g, s, &mut vec![g.initial], k))
}

pub fn random_skeleton(rng: &mut ChaCha8Rng, aps: usize, depth: usize) -> Skeleton {
    let leaf = |rng: &mut ChaCha8Rng| match rng.random_range(0..10) {
        0 => Skeleton::True,
        1 => Skeleton::False,
        _ => Skeleton::Ap(rng.random_range(0..aps)),
    };
    if depth == 0 || rng.random_bool(0.2) {
        return leaf(rng);
    }
    match rng.random_range(0..6) {
        0 => Skeleton::and(random_skeleton(rng, aps, depth), random_skeleton(rng, aps, depth - 1)),
        1 => Skeleton::or(random_skeleton(rng, aps, depth - 1), random_skeleton(rng, aps, depth)),
        2 => Skeleton::until(
            random_skeleton(rng, aps, depth - 1),
            random_skeleton(rng, aps, depth - 1),
        ),
        3 => Skeleton::release(
            random_skeleton(rng, aps, depth - 1),
            random_skeleton(rng, aps, depth - 1),
        ),
        4 => Skeleton::eventually(random_skeleton(rng, aps, depth - 1)),
        _ => Skeleton::always(random_skeleton(rng, aps, depth - 1)),
    }
}

pub fn random_graph(rng: &mut ChaCha8Rng, states: usize, aps: usize) -> LabelledGraph {
    let successors = (0..states)
        .map(|_| {
            let out = rng.random_range(0..=3);
            (0..out).map(|_| rng.random_range(0..states)).collect()
        })
        .collect();
    let labels = (0..states).map(|_| rng.random_range(0..1u64 << aps)).collect();
    LabelledGraph::new(rng.random_range(0..states), successors, labels)
}

pub fn random_labels(rng: &mut ChaCha8Rng, len: usize, aps: usize) -> Vec<LabelMask> {
    (0..len).map(|_| rng.random_range(0..1u64 << aps)).collect()
}

/// Random MLO rollout under uniform box controls, truncated once the mean
/// leaves the workspace or the covariance exceeds `cov_max`. Returns the
/// visited cells with stutters removed.
pub fn random_cell_trajectory(problem: &Problem<'_, f64>, rng: &mut ChaCha8Rng, steps: usize) -> Vec<usize> {
    let sc = problem.scenario;
    let sys = &sc.system;
    let (lo, hi) = sys.input_set.as_box().unwrap();
    let n = sys.n();
    let mut b = if rng.random_bool(0.5) {
        sc.initial.clone()
    } else {
        let ws = &sc.workspace;
        let mean = DVector::from_fn(n, |i, _| rng.random_range(ws.lo[i]..ws.hi[i]));
        let cov = &sc.cov_max * rng.random_range(0.0..1.0);
        BeliefState::new(mean, cov).unwrap()
    };
    let admissible = |b: &BeliefState| sc.workspace.contains(&b.mean) && linalg::psd_leq(&b.cov, &sc.cov_max, 0.0);
    let mut cells = Vec::new();
    if !admissible(&b) {
        return cells;
    }
    cells.push(problem.kripke.cell_of(&b).unwrap());
    let hold = rng.random_range(1..6);
    let mut u = DVector::zeros(sys.m());
    for t in 0..steps {
        if t % hold == 0 {
            u = DVector::from_fn(sys.m(), |i, _| rng.random_range(lo[i]..=hi[i]));
        }
        b = mlo_step(sys, &b, &u).unwrap();
        if !admissible(&b) {
            break;
        }
        let q = problem.kripke.cell_of(&b).unwrap();
        if *cells.last().unwrap() != q {
            cells.push(q);
        }
    }
    cells
}

pub fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &m * m.transpose() + DMatrix::identity(n, n) * 1e-3
}
