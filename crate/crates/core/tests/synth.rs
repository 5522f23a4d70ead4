mod common;

use beliefplan::linalg;
use beliefplan::scenario::parse_scenario;
use beliefplan::synth::{
    check_plan, check_plan_with, id_prtl, monte_carlo, Infeasibility, Problem, SynthesisOutcome, ViolationKind,
};
use common::scenario;
use nalgebra::DMatrix;

fn one_dim(spec: &str, w: f64, cov0: f64, extra_atoms: &str) -> String {
    format!(
        r#"
format_version = 1
spec = "{spec}"
seed = 2
[system]
A = [[1.0]]
B = [[1.0]]
C = [[1.0]]
W = [[{w}]]
[system.noise]
kind = "constant"
V = [[1.0]]
[system.input]
lo = [-1.0]
hi = [1.0]
[initial]
mean = [0.0]
cov = [[{cov0}]]
[workspace]
lo = [-5.0]
hi = [5.0]
[abstraction]
cov_max = [[1.0]]
[atoms]
safe = "p[0.05](x1 <= 3)"
{extra_atoms}
[search]
k_max = 3
iterations = 40
"#
    )
}

#[test]
fn bundled_line_plan_is_sound() {
    let sc = scenario("line_1d");
    let problem = Problem::new(&sc).unwrap();
    let result = id_prtl(&problem).unwrap();
    assert_eq!(result.exit_code(), 0);
    let (plan, lasso) = result.plan().unwrap();
    assert!(check_plan(plan, lasso, &sc).unwrap().is_ok());
    let regions = problem.regions(lasso);
    for (b, &k) in plan.beliefs.iter().zip(&plan.index_map) {
        assert!(regions.conforms(b, k));
    }
    assert_eq!(*plan.index_map.last().unwrap(), lasso.loop_index);
    assert!(plan
        .index_map
        .windows(2)
        .take(plan.horizon() - 1)
        .all(|w| w[1] == w[0] || w[1] == w[0] + 1));
}

#[test]
fn hovering_satisfies_a_stationary_spec() {
    let sc = parse_scenario::<f64>(&one_dim("G safe", 0.01, 0.1, ""), "hover").unwrap();
    let problem = Problem::new(&sc).unwrap();
    let result = id_prtl(&problem).unwrap();
    let (plan, lasso) = result.plan().expect("plan");
    assert_eq!(result.stats.lassos_proposed, 1);
    assert_eq!(lasso.k(), 0);
    assert!(check_plan_with(plan, lasso, &problem).is_ok());
}

#[test]
fn goal_outside_the_workspace_is_infeasible() {
    let text = one_dim("F far", 0.01, 0.1, "far = \"p[0.05](x1 >= 10)\"");
    let sc = parse_scenario::<f64>(&text, "far").unwrap();
    let result = id_prtl(&Problem::new(&sc).unwrap()).unwrap();
    assert!(matches!(
        result.outcome,
        SynthesisOutcome::Infeasible(Infeasibility::BudgetExhausted)
    ));
    assert_eq!(result.exit_code(), 3);
}

#[test]
fn unreachable_goal_blocks_every_lasso() {
    let sc = scenario("unreachable_goal");
    let result = id_prtl(&Problem::new(&sc).unwrap()).unwrap();
    assert!(matches!(
        result.outcome,
        SynthesisOutcome::Infeasible(Infeasibility::BudgetExhausted)
    ));
    assert_eq!(result.stats.lassos_blocked, 17);
    assert_eq!(result.stats.lassos_proposed, result.stats.lassos_blocked);
}

#[test]
fn tampered_plans_are_rejected() {
    let sc = scenario("line_1d");
    let problem = Problem::new(&sc).unwrap();
    let result = id_prtl(&problem).unwrap();
    let (plan, lasso) = result.plan().unwrap();

    let mut pushed = plan.clone();
    pushed.controls[3][0] += 0.1;
    let report = check_plan_with(&pushed, lasso, &problem);
    let first = report.first().unwrap();
    assert_eq!((first.kind, first.step), (ViolationKind::Dynamics, 4));

    let mut inflated = plan.clone();
    let h = inflated.horizon();
    inflated.beliefs[h].cov += DMatrix::identity(1, 1) * 1e-3;
    let entry = &inflated.beliefs[inflated.loop_entry].cov;
    assert!(linalg::min_eigenvalue(&(entry - &inflated.beliefs[h].cov)) < -sc.params.tol_psd);
    let report = check_plan_with(&inflated, lasso, &problem);
    assert!(report.has(ViolationKind::LoopCovariance));
    assert!(!report.is_ok());

    let mut moved = plan.clone();
    moved.beliefs[0].mean[0] += 0.5;
    assert_eq!(
        check_plan_with(&moved, lasso, &problem).first().unwrap().kind,
        ViolationKind::Initial
    );
}

#[test]
fn monte_carlo_is_deterministic_and_bounded() {
    let sc = scenario("line_1d");
    let problem = Problem::new(&sc).unwrap();
    let result = id_prtl(&problem).unwrap();
    let (plan, lasso) = result.plan().unwrap();
    let m = 4000;
    let a = monte_carlo(plan, lasso, &problem, m, 9).unwrap();
    let b = monte_carlo(plan, lasso, &problem, m, 9).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.steps, plan.horizon() + 1);
    let bound = 0.95 - 3.0 * (0.05f64 * 0.95 / m as f64).sqrt();
    for atom in &a.atoms {
        assert!(atom
            .true_state
            .iter()
            .chain(&atom.belief)
            .all(|f| (0.0..=1.0).contains(f)));
        for (t, planned) in atom.planned.iter().enumerate() {
            if *planned {
                assert!(
                    atom.true_state[t] >= bound,
                    "{} at step {t}: {}",
                    atom.name,
                    atom.true_state[t]
                );
            }
        }
    }
    assert!(monte_carlo(plan, lasso, &problem, 0, 1).is_err());
}

#[test]
fn noiseless_rollouts_repeat_the_plan() {
    let text = one_dim("G safe & F goal", 0.0, 0.0, "goal = \"p[0.05](x1 >= 2)\"");
    let sc = parse_scenario::<f64>(&text, "exact").unwrap();
    let problem = Problem::new(&sc).unwrap();
    let result = id_prtl(&problem).unwrap();
    let (plan, lasso) = result.plan().expect("plan");
    let report = monte_carlo(plan, lasso, &problem, 50, 3).unwrap();
    for atom in &report.atoms {
        for (t, planned) in atom.planned.iter().enumerate() {
            let expected = if *planned { 1.0 } else { 0.0 };
            assert_eq!(atom.belief[t], expected, "{} at {t}", atom.name);
            assert!(atom.true_state[t] == 0.0 || atom.true_state[t] == 1.0);
        }
    }
    assert!(report.region.iter().all(|&f| f == 1.0));
}
