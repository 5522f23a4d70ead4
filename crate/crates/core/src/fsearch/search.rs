use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::control::{belief_vector, blqr, clamp_control, equilibrium, loop_controls, lqr, BlqrWeights};
use super::regions::Regions;
use super::tree::{best_nearest, drain, SearchTree, Vertex};
use crate::belief::{mlo_rollout, mlo_step, BeliefState, LinearSystem};
use crate::error::Result;
use crate::linalg;
use crate::scalar::Scalar;

/// Beliefs `b₀…b_T` and the controls between them.
pub type Run<T> = (Vec<BeliefState<T>>, Vec<DVector<T>>);

/// Tuning knobs of the feasibility search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams<T: Scalar> {
    pub delta_near: T,
    pub delta_drain: T,
    pub w_cov: T,
    pub t_min: usize,
    pub t_max: usize,
    pub q_mean: T,
    pub q_cov: T,
    pub qf_mean: T,
    pub qf_cov: T,
    pub r: T,
    /// Iterations per lasso segment.
    pub iterations: usize,
    pub tol_loop: T,
    pub tol_psd: T,
    pub settle_steps: usize,
    pub max_hold_cycles: usize,
    /// Stop at the first closed plan instead of exhausting the budget.
    pub early_exit: bool,
}

impl<T: Scalar> Default for SearchParams<T> {
    fn default() -> Self {
        SearchParams {
            delta_near: T::of(0.5),
            delta_drain: T::of(0.25),
            w_cov: T::one(),
            t_min: 1,
            t_max: 20,
            q_mean: T::one(),
            q_cov: T::of(10.0),
            qf_mean: T::of(10.0),
            qf_cov: T::of(100.0),
            r: T::one(),
            iterations: 500,
            tol_loop: T::of(1e-4),
            tol_psd: T::of(1e-6),
            settle_steps: 200,
            max_hold_cycles: 500,
            early_exit: true,
        }
    }
}

/// Open-loop plan: beliefs `b₀…b_H`, controls `u₀…u_{H−1}`, the lasso
/// position of each belief, and the step where the loop re-enters.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan<T: Scalar> {
    pub beliefs: Vec<BeliefState<T>>,
    pub controls: Vec<DVector<T>>,
    pub index_map: Vec<usize>,
    pub loop_entry: usize,
}

impl<T: Scalar> Plan<T> {
    /// `H`, the number of steps.
    pub fn horizon(&self) -> usize {
        self.controls.len()
    }
}

#[derive(Debug, Clone)]
pub struct FsearchOutcome<T: Scalar> {
    pub plan: Option<Plan<T>>,
    pub iterations: usize,
    pub vertices: usize,
    /// Furthest lasso position any vertex reached.
    pub max_progress: usize,
    /// Loop-closure attempts.
    pub closures: usize,
}

/// Everything propagate needs besides the tree.
pub struct Context<'a, T: Scalar> {
    pub sys: &'a LinearSystem<T>,
    pub regions: &'a Regions<T>,
    pub params: &'a SearchParams<T>,
    pub cov_max: &'a DMatrix<T>,
    pub gain: DMatrix<T>,
    pub weights: BlqrWeights<T>,
}

impl<'a, T: Scalar> Context<'a, T> {
    pub fn new(
        sys: &'a LinearSystem<T>,
        regions: &'a Regions<T>,
        params: &'a SearchParams<T>,
        cov_max: &'a DMatrix<T>,
    ) -> Result<Self> {
        let (n, m) = (sys.n(), sys.m());
        let gain = lqr(
            &sys.a,
            &sys.b,
            &DMatrix::from_diagonal_element(n, n, params.q_mean),
            &DMatrix::from_diagonal_element(m, m, params.r),
        )?;
        let weights = BlqrWeights::diagonal(
            n,
            m,
            params.q_mean,
            params.q_cov,
            params.qf_mean,
            params.qf_cov,
            params.r,
        );
        Ok(Context {
            sys,
            regions,
            params,
            cov_max,
            gain,
            weights,
        })
    }

    fn track(&self, b: &BeliefState<T>, target: &DVector<T>, steps: usize) -> Result<Run<T>> {
        let mut beliefs = vec![b.clone()];
        let mut controls = Vec::with_capacity(steps);
        for _ in 0..steps {
            let cur = beliefs.last().unwrap();
            let u = clamp_control(&(-(&self.gain * (&cur.mean - target))), &self.sys.input_set);
            beliefs.push(mlo_step(self.sys, cur, &u)?);
            controls.push(u);
        }
        Ok((beliefs, controls))
    }

    /// Mean-only LQR run towards `target`, then a belief-LQR re-run along
    /// it. Returns the re-run's beliefs (including `b`) and controls.
    pub fn steer(&self, b: &BeliefState<T>, target: &DVector<T>, steps: usize) -> Result<Run<T>> {
        let (nominal, nominal_u) = self.track(b, target, steps)?;
        let gains = match blqr(self.sys, &nominal, &nominal_u, &self.weights) {
            Ok(g) => g,
            Err(_) => return Ok((nominal, nominal_u)),
        };
        let n = self.sys.n();
        let mut s_target = DVector::zeros(belief_vector(b).len());
        s_target.rows_mut(0, n).copy_from(target);
        let mut beliefs = vec![b.clone()];
        let mut controls = Vec::with_capacity(steps);
        for f in &gains {
            let cur = beliefs.last().unwrap();
            let s = belief_vector(cur);
            let u = clamp_control(&(-(f * (s - &s_target))), &self.sys.input_set);
            beliefs.push(mlo_step(self.sys, cur, &u)?);
            controls.push(u);
        }
        Ok((beliefs, controls))
    }
}

/// Walks a run from position `start`, advancing at most one position, and
/// stops before the first belief that conforms to neither. Returns the
/// number of steps kept and their positions.
fn conforming_prefix<T: Scalar>(regions: &Regions<T>, run: &[BeliefState<T>], start: usize) -> Vec<usize> {
    let last = regions.last();
    let mut pos = start;
    let mut out = Vec::new();
    for b in &run[1..] {
        if pos == start && pos < last && regions.conforms(b, pos + 1) {
            pos += 1;
        } else if !regions.conforms(b, pos) {
            break;
        }
        out.push(pos);
    }
    out
}

/// One tree expansion from vertex `near`; returns the new vertex, if any.
pub fn propagate<T: Scalar, R: Rng + ?Sized>(
    ctx: &Context<'_, T>,
    tree: &SearchTree<T>,
    near: usize,
    rng: &mut R,
) -> Option<Vertex<T>> {
    let v = &tree.vertices[near];
    let k = v.progress;
    let target_region = if k < ctx.regions.last() && rng.random::<bool>() {
        k + 1
    } else {
        k
    };
    let target = ctx.regions.sample_mean(target_region, rng)?;
    let steps = rng.random_range(ctx.params.t_min..=ctx.params.t_max);
    let (run, controls) = ctx.steer(&v.belief, &target, steps).ok()?;
    let positions = conforming_prefix(ctx.regions, &run, k);
    let kept = positions.len();
    if kept == 0 {
        return None;
    }
    Some(Vertex {
        belief: run[kept].clone(),
        progress: positions[kept - 1],
        cost: v.cost + kept,
        active: true,
        parent: Some(near),
        controls: controls[..kept].to_vec(),
        positions,
    })
}

/// Attempts to close the loop after vertex `id`, which must have reached
/// the last lasso position.
pub fn feas_run<T: Scalar>(
    ctx: &Context<'_, T>,
    tree: &SearchTree<T>,
    b0: &BeliefState<T>,
    id: usize,
) -> Option<Plan<T>> {
    let (controls, positions) = tree.trace_to(id);
    let beliefs = mlo_rollout(ctx.sys, b0, &controls).ok()?;
    let last = ctx.regions.last();
    if *positions.last()? != last {
        return None;
    }
    let prefix = Plan {
        beliefs,
        controls,
        index_map: positions,
        loop_entry: 0,
    };
    if ctx.regions.loop_index == last {
        close_by_holding(ctx, prefix)
    } else {
        close_to_entry(ctx, prefix)
    }
}

fn push_step<T: Scalar>(ctx: &Context<'_, T>, plan: &mut Plan<T>, u: DVector<T>, pos: usize) -> Option<()> {
    let next = mlo_step(ctx.sys, plan.beliefs.last()?, &u).ok()?;
    if !ctx.regions.conforms(&next, pos) {
        return None;
    }
    plan.beliefs.push(next);
    plan.controls.push(u);
    plan.index_map.push(pos);
    Some(())
}

/// Self-loop on the last position: settle the mean with LQR, then repeat
/// `n`-step hold cycles until one cycle returns to its start mean with no
/// larger covariance. The last cycle is the loop.
fn close_by_holding<T: Scalar>(ctx: &Context<'_, T>, mut plan: Plan<T>) -> Option<Plan<T>> {
    let last = ctx.regions.last();
    let p = ctx.params;
    let last_mean = plan.beliefs.last()?.mean.clone();
    let (anchor, u_eq) = equilibrium(ctx.sys, &last_mean).unwrap_or_else(|| (last_mean, DVector::zeros(ctx.sys.m())));
    let settle_tol = p.tol_loop * T::of(0.01);
    for _ in 0..p.settle_steps {
        let cur = plan.beliefs.last()?.mean.clone();
        if (&cur - &anchor).amax() < settle_tol {
            break;
        }
        let u = clamp_control(&(&u_eq - &ctx.gain * (&cur - &anchor)), &ctx.sys.input_set);
        push_step(ctx, &mut plan, u, last)?;
    }
    let hold = plan.beliefs.last()?.mean.clone();
    for _ in 0..p.max_hold_cycles {
        let start = plan.beliefs.len() - 1;
        let lc = loop_controls(ctx.sys, &plan.beliefs[start].mean, &hold).ok()?;
        for u in lc.controls {
            push_step(ctx, &mut plan, u, last)?;
        }
        let (b_start, b_end) = (&plan.beliefs[start], plan.beliefs.last()?);
        if linalg::inf_norm(&(&b_end.mean - &b_start.mean)) < p.tol_loop
            && linalg::psd_leq(&b_end.cov, &b_start.cov, p.tol_psd)
        {
            plan.loop_entry = start;
            return Some(plan);
        }
    }
    None
}

/// Loop back to an earlier step at the loop position: LQR towards that
/// step's mean, then an exact `n`-step mean closure.
fn close_to_entry<T: Scalar>(ctx: &Context<'_, T>, prefix: Plan<T>) -> Option<Plan<T>> {
    let last = ctx.regions.last();
    let l = ctx.regions.loop_index;
    let p = ctx.params;
    let n = ctx.sys.n();
    let candidates: Vec<usize> = (0..prefix.beliefs.len())
        .rev()
        .filter(|&j| prefix.index_map[j] == l)
        .collect();
    for j in candidates {
        let entry = prefix.beliefs[j].clone();
        'approach: for approach in [0, p.t_max] {
            let mut plan = prefix.clone();
            for _ in 0..approach {
                let cur = plan.beliefs.last().unwrap().mean.clone();
                let u = clamp_control(&(-(&ctx.gain * (&cur - &entry.mean))), &ctx.sys.input_set);
                if push_step(ctx, &mut plan, u, last).is_none() {
                    continue 'approach;
                }
            }
            let from = plan.beliefs.last().unwrap().mean.clone();
            let Ok(lc) = loop_controls(ctx.sys, &from, &entry.mean) else {
                return None;
            };
            for (i, u) in lc.controls.into_iter().enumerate() {
                let pos = if i + 1 == n { l } else { last };
                if push_step(ctx, &mut plan, u, pos).is_none() {
                    continue 'approach;
                }
            }
            let end = plan.beliefs.last().unwrap();
            if linalg::inf_norm(&(&end.mean - &entry.mean)) < p.tol_loop
                && linalg::psd_leq(&end.cov, &entry.cov, p.tol_psd)
            {
                plan.loop_entry = j;
                return Some(plan);
            }
        }
    }
    None
}

/// Sampling-based search for a belief trajectory realizing the lasso.
pub fn fsearch<T: Scalar, R: Rng + ?Sized>(
    sys: &LinearSystem<T>,
    b0: &BeliefState<T>,
    regions: &Regions<T>,
    cov_max: &DMatrix<T>,
    params: &SearchParams<T>,
    rng: &mut R,
) -> Result<FsearchOutcome<T>> {
    let ctx = Context::new(sys, regions, params, cov_max)?;
    let mut tree = SearchTree::new(b0.clone());
    let mut fail = FsearchOutcome {
        plan: None,
        iterations: 0,
        vertices: 1,
        max_progress: 0,
        closures: 0,
    };
    if !regions.conforms(b0, 0) {
        return Ok(fail);
    }
    let budget = regions.last().max(1) * params.iterations;
    let mut best: Option<Plan<T>> = None;
    let consider = |plan: Plan<T>, best: &mut Option<Plan<T>>| {
        let better = match best {
            None => true,
            Some(b) => {
                (plan.horizon(), plan.beliefs.last().unwrap().trace().f64())
                    < (b.horizon(), b.beliefs.last().unwrap().trace().f64())
            }
        };
        if better {
            *best = Some(plan);
        }
    };
    if regions.last() == 0 {
        fail.closures += 1;
        if let Some(plan) = feas_run(&ctx, &tree, b0, 0) {
            consider(plan, &mut best);
        }
    }
    let mut iterations = 0;
    while iterations < budget && !(params.early_exit && best.is_some()) {
        iterations += 1;
        let active: Vec<&BeliefState<T>> = tree.active().map(|i| &tree.vertices[i].belief).collect();
        let Some(b_rand) = regions.sample(&active, cov_max, rng) else {
            continue;
        };
        let Some(near) = best_nearest(&tree, &b_rand, params.delta_near, params.w_cov) else {
            break;
        };
        let Some(v) = propagate(&ctx, &tree, near, rng) else {
            continue;
        };
        let complete = v.progress == regions.last();
        let id = tree.add(v);
        drain(&mut tree, id, params.delta_drain, params.w_cov);
        fail.max_progress = fail.max_progress.max(tree.vertices[id].progress);
        if complete {
            fail.closures += 1;
            if let Some(plan) = feas_run(&ctx, &tree, b0, id) {
                consider(plan, &mut best);
            }
        }
    }
    fail.iterations = iterations;
    fail.vertices = tree.vertices.len();
    fail.plan = best;
    Ok(fail)
}
