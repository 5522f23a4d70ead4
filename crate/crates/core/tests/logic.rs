use beliefplan::logic::{chance_margin, extract_subformulas, normal_cdf, normal_quantile, parse_formula, pred_holds};
use beliefplan::{BeliefState, Formula, Predicate};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &m * m.transpose() + DMatrix::identity(n, n) * 1e-3
}

#[test]
fn quantile_cdf_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let p: f64 = rng.random_range(1e-6..1.0 - 1e-6);
        let z = normal_quantile(p).unwrap();
        assert!((normal_cdf(z) - p).abs() < 1e-10, "p = {p}");
    }
}

#[test]
fn quantile_known_values() {
    assert!((normal_quantile(0.95).unwrap() - 1.6448536269514722).abs() < 1e-9);
    assert!((normal_quantile(0.05).unwrap() + 1.6448536269514722).abs() < 1e-9);
    assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
}

#[test]
fn larger_covariance_never_makes_a_predicate_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let n = rng.random_range(1..4);
        let c = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        if c.amax() < 1e-3 {
            continue;
        }
        let pred = Predicate::new(
            c,
            rng.random_range(-2.0..2.0),
            rng.random_range(0.01..0.4),
            rng.random_bool(0.5),
        )
        .unwrap();
        let mean = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let small = random_spd(n, &mut rng) * 0.1;
        let large = &small + random_spd(n, &mut rng);
        let hs = pred_holds(&pred, &BeliefState::new(mean.clone(), small.clone()).unwrap()).unwrap();
        let hl = pred_holds(&pred, &BeliefState::new(mean, large.clone()).unwrap()).unwrap();
        assert!(!hl || hs);
        assert!(chance_margin(&pred, &large).unwrap() <= chance_margin(&pred, &small).unwrap() + 1e-12);
    }
}

#[test]
fn holding_predicates_are_satisfied_often_enough() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 20_000;
    let mut checked = 0;
    while checked < 20 {
        let n = rng.random_range(1..4);
        let pred = Predicate::new(
            DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            rng.random_range(-1.0..3.0),
            0.05,
            false,
        )
        .unwrap();
        let b = BeliefState::new(
            DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            random_spd(n, &mut rng),
        )
        .unwrap();
        if !pred_holds(&pred, &b).unwrap() {
            continue;
        }
        checked += 1;
        let l = b.cov.clone().cholesky().unwrap().l();
        let hits = (0..samples)
            .filter(|_| {
                let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                pred.satisfied_by(&(&b.mean + &l * z))
            })
            .count();
        let freq = hits as f64 / samples as f64;
        assert!(
            freq >= 0.95 - 3.0 * (0.05f64 * 0.95 / samples as f64).sqrt(),
            "frequency {freq}"
        );
    }
}

#[test]
fn negated_predicate_checked_by_sampling() {
    let pred = Predicate::new(DVector::from_element(1, 1.0), -3.0, 0.05, true).unwrap();
    let b = BeliefState::new(DVector::from_element(1, 0.0), DMatrix::identity(1, 1)).unwrap();
    assert!(pred_holds(&pred, &b).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1_000_000;
    let hits = (0..n)
        .filter(|_| pred.satisfied_by(&DVector::from_element(1, rng.sample(StandardNormal))))
        .count();
    assert!(hits as f64 / n as f64 > 0.95);
}

#[test]
fn single_precision_predicates() {
    let pred = beliefplan::logic::Predicate::<f32>::new(DVector::from_element(1, 1.0), 3.0, 0.05, false).unwrap();
    let b = beliefplan::belief::BeliefState::new(DVector::from_element(1, 0.0f32), DMatrix::from_element(1, 1, 4.0f32))
        .unwrap();
    let m = chance_margin(&pred, &b.cov).unwrap();
    assert!((m - (3.0 - 2.0 * 1.6448536)).abs() < 1e-5);
    assert!(!pred_holds(&pred, &b).unwrap());
}

const OPS: [&str; 4] = ["&", "|", "U", "R"];

fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 || rng.random_bool(0.25) {
        let neg = if rng.random_bool(0.3) { "!" } else { "" };
        let c1: i32 = rng.random_range(-3..=3);
        let c2: i32 = rng.random_range(1..=3);
        let b: i32 = rng.random_range(-5..=5);
        let eps = [0.01, 0.05, 0.1, 0.25][rng.random_range(0..4)];
        let cmp = if rng.random_bool(0.5) { "<=" } else { ">=" };
        return format!("{neg}p[{eps}]({c1}*x1 + {c2}*x2 {cmp} {b})");
    }
    match rng.random_range(0..6) {
        0 => format!("G {}", random_formula(rng, depth - 1)),
        1 => format!("F {}", random_formula(rng, depth - 1)),
        k => format!(
            "({} {} {})",
            random_formula(rng, depth - 1),
            OPS[k - 2],
            random_formula(rng, depth - 1)
        ),
    }
}

#[test]
fn printing_then_parsing_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..50 {
        let text = random_formula(&mut rng, 4);
        let f: Formula = parse_formula(&text).unwrap();
        let again: Formula = parse_formula(&f.to_string()).unwrap();
        assert_eq!(f, again, "{text}");
    }
}

#[test]
fn abstraction_reassembles_the_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let f: Formula = parse_formula(&random_formula(&mut rng, 4)).unwrap();
        let abs = extract_subformulas(&f);
        assert_eq!(abs.reassemble(), f);
        assert!(abs.aps.iter().all(|ap| ap.is_temporal_free()));
        assert_eq!(abs.skeleton.ap_count(), abs.aps.len());
    }
}

proptest! {
    #[test]
    fn margin_matches_closed_form(c in -3.0f64..3.0, b in -5.0f64..5.0, var in 0.0f64..9.0, eps in 0.01f64..0.49) {
        prop_assume!(c.abs() > 1e-3);
        let pred = Predicate::new(DVector::from_element(1, c), b, eps, false).unwrap();
        let m = chance_margin(&pred, &DMatrix::from_element(1, 1, var)).unwrap();
        let expected = b - normal_quantile(1.0 - eps).unwrap() * (c * c * var).sqrt();
        prop_assert!((m - expected).abs() < 1e-9);
    }
}
