use std::fmt;

use serde::{Deserialize, Serialize};

use super::idprtl::Problem;
use crate::belief::{mlo_step, INPUT_SLACK};
use crate::bmc::{eval_on_lasso, LassoPath};
use crate::error::Result;
use crate::fsearch::Plan;
use crate::linalg;
use crate::scalar::Scalar;
use crate::scenario::Scenario;

/// Per-step tolerance on the replayed belief.
pub const DYNAMICS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Shape,
    Lasso,
    Initial,
    Input,
    Dynamics,
    IndexMap,
    Region,
    LoopMean,
    LoopCovariance,
    Spec,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Shape => "shape",
            ViolationKind::Lasso => "lasso",
            ViolationKind::Initial => "initial",
            ViolationKind::Input => "input",
            ViolationKind::Dynamics => "dynamics",
            ViolationKind::IndexMap => "index_map",
            ViolationKind::Region => "region",
            ViolationKind::LoopMean => "loop_mean",
            ViolationKind::LoopCovariance => "loop_covariance",
            ViolationKind::Spec => "spec",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation at step {}: {}", self.kind, self.step, self.detail)
    }
}

/// Result of [`check_plan`]: every violation found, in check order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanCheck {
    pub violations: Vec<Violation>,
}

impl PlanCheck {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, step: usize, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation {
            step,
            kind,
            detail: detail.into(),
        });
    }
}

fn fail(step: usize, kind: ViolationKind, detail: impl Into<String>) -> PlanCheck {
    let mut c = PlanCheck::default();
    c.push(step, kind, detail);
    c
}

/// Builds the abstraction and validates the plan against it.
pub fn check_plan<T: Scalar>(plan: &Plan<T>, lasso: &LassoPath, scenario: &Scenario<T>) -> Result<PlanCheck> {
    let problem = Problem::new(scenario)?;
    Ok(check_plan_with(plan, lasso, &problem))
}

/// Replays the plan through the belief dynamics and checks the initial
/// belief, input set, lasso positions, region membership, loop closure and
/// the specification on the realized label word.
pub fn check_plan_with<T: Scalar>(plan: &Plan<T>, lasso: &LassoPath, problem: &Problem<'_, T>) -> PlanCheck {
    use ViolationKind::*;
    let sc = problem.scenario;
    let sys = &sc.system;
    let (n, m) = (sys.n(), sys.m());
    let h = plan.horizon();
    if h == 0 || plan.beliefs.len() != h + 1 || plan.index_map.len() != h + 1 || plan.loop_entry >= h {
        return fail(
            0,
            Shape,
            "need H >= 1, H + 1 beliefs and index entries, loop entry below H",
        );
    }
    for (t, b) in plan.beliefs.iter().enumerate() {
        if b.mean.len() != n || b.cov.shape() != (n, n) {
            return fail(t, Shape, format!("belief is not {n}-dimensional"));
        }
    }
    for (t, u) in plan.controls.iter().enumerate() {
        if u.len() != m {
            return fail(t, Shape, format!("control is not {m}-dimensional"));
        }
    }
    if !lasso.is_path_in(&problem.graph) {
        return fail(0, Lasso, "not a lasso of the abstraction");
    }
    let mut out = PlanCheck::default();
    let tol = T::of(DYNAMICS_TOL);
    let b0 = &plan.beliefs[0];
    if (&b0.mean - &sc.initial.mean).amax() > tol || (&b0.cov - &sc.initial.cov).amax() > tol {
        out.push(0, Initial, "first belief differs from the scenario's initial belief");
    }
    for (t, u) in plan.controls.iter().enumerate() {
        if !sys.input_set.contains(u, T::of(INPUT_SLACK)) {
            out.push(
                t,
                Input,
                format!("control outside the input set by {}", sys.input_set.violation(u)),
            );
        }
        let next = match mlo_step(sys, &plan.beliefs[t], u) {
            Ok(b) => b,
            Err(e) => {
                out.push(t, Dynamics, e.to_string());
                continue;
            }
        };
        let b = &plan.beliefs[t + 1];
        let err = (&next.mean - &b.mean).amax().max((&next.cov - &b.cov).amax());
        if err > tol {
            out.push(t + 1, Dynamics, format!("replay differs by {err}"));
        }
    }
    let (k, l) = (lasso.k(), lasso.loop_index);
    let im = &plan.index_map;
    if im[0] != 0 {
        out.push(0, IndexMap, "must start at position 0");
    }
    let mut im_ok = im[0] == 0;
    for t in 0..h {
        let (a, b) = (im[t], im[t + 1]);
        let step_ok = if t + 1 == h {
            b == l && a == k
        } else {
            b == a || b == a + 1
        };
        if !step_ok || b > k {
            out.push(t + 1, IndexMap, format!("position {a} to {b} is not a lasso step"));
            im_ok = false;
            break;
        }
    }
    if im[plan.loop_entry] != l {
        out.push(
            plan.loop_entry,
            IndexMap,
            format!("loop entry is at position {}, not {l}", im[plan.loop_entry]),
        );
    }
    if im_ok {
        let regions = problem.regions(lasso);
        for (t, b) in plan.beliefs.iter().enumerate() {
            if !regions.conforms(b, im[t]) {
                out.push(t, Region, format!("belief outside the region of position {}", im[t]));
            }
        }
    }
    let (entry, end) = (&plan.beliefs[plan.loop_entry], &plan.beliefs[h]);
    let gap = (&end.mean - &entry.mean).amax();
    if gap >= sc.params.tol_loop {
        out.push(h, LoopMean, format!("loop mean gap {gap}"));
    }
    if !linalg::psd_leq(&end.cov, &entry.cov, sc.params.tol_psd) {
        let d = linalg::min_eigenvalue(&(&entry.cov - &end.cov));
        out.push(
            h,
            LoopCovariance,
            format!("entry minus end covariance has eigenvalue {d}"),
        );
    }
    let labels: Vec<_> = plan.beliefs[..h]
        .iter()
        .map(|b| problem.kripke.belief_label(b))
        .collect();
    if !eval_on_lasso(&problem.formula.skeleton, &labels, plan.loop_entry) {
        out.push(0, Spec, "realized label word violates the specification");
    }
    out
}
