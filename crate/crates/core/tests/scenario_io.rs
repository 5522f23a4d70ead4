mod common;

use beliefplan::io::{plan_from_csv, plan_to_csv, to_json, PlanFile, ResultSummary};
use beliefplan::logic::extract_subformulas;
use beliefplan::scenario::parse_scenario;
use beliefplan::synth::{id_prtl, Problem};
use beliefplan::{Error, Formula, Plan, Scenario};
use common::{scenario, scenario_path};

fn line_text() -> String {
    std::fs::read_to_string(scenario_path("line_1d")).unwrap()
}

fn field_of(text: &str) -> String {
    match parse_scenario::<f64>(text, "t") {
        Err(Error::Scenario { field, .. }) => field,
        other => panic!("expected a scenario error, got {other:?}"),
    }
}

#[test]
fn quadrotor_loads_as_declared() {
    let sc = scenario("quadrotor_inspection");
    assert_eq!(sc.system.n(), 4);
    assert_eq!(sc.system.m(), 2);
    let names: Vec<&str> = sc.atoms.iter().map(|(n, _)| n.as_str()).collect();
    for name in ["safe", "photo", "high", "west", "east"] {
        assert!(names.contains(&name), "{name}");
        assert_eq!(sc.atom(name).unwrap().eps, 0.05);
    }
    assert!(matches!(sc.formula, Formula::And(..)));
    let abs = extract_subformulas(&sc.formula);
    assert_eq!(abs.aps.len(), 4);
    assert_eq!(abs.reassemble(), sc.formula);
    assert_eq!(sc.k_max, 8);
}

#[test]
fn indefinite_process_noise_names_w() {
    let text = line_text().replace("W = [[0.01]]", "W = [[-0.01]]");
    assert_eq!(field_of(&text), "system.W");
}

#[test]
fn unstabilisable_pair_names_b() {
    let text = line_text()
        .replace("A = [[1.0]]", "A = [[1.5]]")
        .replace("B = [[1.0]]", "B = [[0.0]]");
    match parse_scenario::<f64>(&text, "t") {
        Err(Error::Scenario { field, reason }) => {
            assert_eq!(field, "system.B");
            assert!(reason.contains("stabilisable"), "{reason}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_documents_are_rejected() {
    let unknown = line_text().replace("k_max = 4", "k_max = 4\nbogus = 1");
    assert!(parse_scenario::<f64>(&unknown, "t").is_err());
    let version = line_text().replace("format_version = 1", "format_version = 7");
    assert_eq!(field_of(&version), "format_version");
    let negated = line_text().replace("safe = \"p[0.05](x1 <= 6)\"", "safe = \"!p[0.05](x1 <= 6)\"");
    assert_eq!(field_of(&negated), "atoms.safe");
    let undeclared = line_text().replace("G safe &", "G nowhere &");
    assert_eq!(field_of(&undeclared), "spec");
    let outside = line_text().replace("mean = [0.0]", "mean = [9.0]");
    assert_eq!(field_of(&outside), "initial.mean");
}

fn line_plan() -> (Scenario, Plan, beliefplan::bmc::LassoPath, ResultSummary) {
    let sc = scenario("line_1d");
    let problem = Problem::new(&sc).unwrap();
    let result = id_prtl(&problem).unwrap();
    let summary = ResultSummary::new(&result, &sc.name);
    let (plan, lasso) = result.plan().unwrap();
    let (plan, lasso) = (plan.clone(), lasso.clone());
    (sc, plan, lasso, summary)
}

#[test]
fn plan_json_round_trip_is_lossless() {
    let (sc, plan, lasso, _) = line_plan();
    let file = PlanFile::new(&plan, &lasso, &sc.name, None);
    let text = to_json(&file).unwrap();
    let back: PlanFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.plan::<f64>().unwrap(), plan);
    assert_eq!(to_json(&back).unwrap(), text);
}

#[test]
fn plan_csv_round_trip_is_lossless() {
    let (_, plan, _, _) = line_plan();
    let text = plan_to_csv(&plan).unwrap();
    assert_eq!(text.lines().count(), plan.horizon() + 2);
    let back: Plan = plan_from_csv(&text).unwrap();
    assert_eq!(back, plan);
    assert!(plan_from_csv::<f64>("t,mu_0\n0,zero\n").is_err());
}

#[test]
fn summary_reports_the_outcome() {
    let (_, plan, lasso, summary) = line_plan();
    assert_eq!(summary.outcome, "plan");
    assert_eq!(summary.horizon, Some(plan.horizon()));
    assert_eq!(summary.lasso, Some(lasso));
    let back: ResultSummary = serde_json::from_str(&to_json(&summary).unwrap()).unwrap();
    assert_eq!(back, summary);
}
