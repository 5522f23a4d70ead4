use beliefplan::belief::{
    kalman_update, mlo_rollout, mlo_step, noise_cov, simulate_step, InputSet, NoiseModel, PolyTerm,
};
use beliefplan::{linalg, BeliefState, LinearSystem};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = random_matrix(n, n, rng);
    &m * m.transpose() + DMatrix::identity(n, n) * 0.1
}

fn random_system(n: usize, rng: &mut ChaCha8Rng) -> LinearSystem {
    loop {
        let a = random_matrix(n, n, rng) * 0.6;
        let b = random_matrix(n, 1, rng);
        let c = random_matrix(2, n, rng);
        let sys = LinearSystem::new(
            a,
            b,
            c,
            random_spd(n, rng) * 0.1,
            NoiseModel::Constant(random_spd(2, rng)),
            InputSet::bounds(&[-1.0], &[1.0]).unwrap(),
        );
        if let Ok(sys) = sys {
            return sys;
        }
    }
}

#[test]
fn kalman_with_likeliest_observation_is_mlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let sys = random_system(3, &mut rng);
        let b = BeliefState::new(
            DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)),
            random_spd(3, &mut rng),
        )
        .unwrap();
        let u = DVector::from_element(1, rng.random_range(-1.0..1.0));
        let y = &sys.c * (&sys.a * &b.mean + &sys.b * &u);
        let k = kalman_update(&sys, &b, &u, &y).unwrap();
        let m = mlo_step(&sys, &b, &u).unwrap();
        assert!((&k.mean - &m.mean).amax() < 1e-14);
        assert!((&k.cov - &m.cov).amax() < 1e-14);
    }
}

#[test]
fn posterior_is_below_prediction_and_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let sys = random_system(3, &mut rng);
        let b = BeliefState::new(DVector::zeros(3), random_spd(3, &mut rng)).unwrap();
        let u = DVector::from_element(1, 0.3);
        let next = mlo_step(&sys, &b, &u).unwrap();
        let gamma = &sys.a * &b.cov * sys.a.transpose() + &sys.w;
        assert!(linalg::psd_leq(&next.cov, &gamma, 1e-10));
        assert_eq!(next.cov, next.cov.transpose());
    }
}

#[test]
fn riccati_iteration_reaches_a_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sys = random_system(3, &mut rng);
    let u = DVector::zeros(1);
    let mut b = BeliefState::new(DVector::zeros(3), DMatrix::identity(3, 3)).unwrap();
    let mut residual = f64::INFINITY;
    for _ in 0..10_000 {
        let next = mlo_step(&sys, &b, &u).unwrap();
        residual = (&next.cov - &b.cov).amax();
        b = next;
        if residual < 1e-12 {
            break;
        }
    }
    assert!(residual < 1e-8);
    let gamma = &sys.a * &b.cov * sys.a.transpose() + &sys.w;
    let v = noise_cov(&sys.noise, &b.mean);
    let s = &sys.c * &gamma * sys.c.transpose() + v;
    let k = &gamma * sys.c.transpose() * s.try_inverse().unwrap();
    let fixed = &gamma - &k * &sys.c * &gamma;
    assert!((fixed - &b.cov).amax() < 1e-8);
}

#[test]
fn nilpotent_blind_system_forgets_everything() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let sys = LinearSystem::new(
        a,
        DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        DMatrix::zeros(1, 2),
        DMatrix::zeros(2, 2),
        NoiseModel::Constant(DMatrix::identity(1, 1)),
        InputSet::bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap();
    let b0 = BeliefState::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
    let beliefs = mlo_rollout(&sys, &b0, &[DVector::zeros(1), DVector::zeros(1)]).unwrap();
    assert_eq!(beliefs[2].mean, DVector::zeros(2));
    assert!(beliefs[2].cov.amax() < 1e-15);
}

#[test]
fn observation_noise_follows_the_state() {
    let noise = NoiseModel::MinOfConstAndPoly {
        var_const: 1.0,
        var_min: 0.04,
        terms: vec![vec![PolyTerm {
            index: 0,
            shift: 0.0,
            power: 2,
            coeff: 1.0,
        }]],
    };
    let sys = LinearSystem::new(
        DMatrix::identity(1, 1),
        DMatrix::identity(1, 1),
        DMatrix::identity(1, 1),
        DMatrix::zeros(1, 1),
        noise.clone(),
        InputSet::bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = DVector::zeros(1);
    for x in [0.0, 0.5, 3.0] {
        let x = DVector::from_element(1, x);
        let expected = noise_cov(&noise, &x)[(0, 0)];
        let n = 100_000;
        let var = (0..n)
            .map(|_| {
                let (xn, y) = simulate_step(&sys, &x, &u, &mut rng);
                (y[0] - xn[0]).powi(2)
            })
            .sum::<f64>()
            / n as f64;
        assert!(
            (var / expected - 1.0).abs() < 0.03,
            "x = {x}, var = {var}, expected {expected}"
        );
    }
}

#[test]
fn noiseless_simulation_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sys = LinearSystem::new(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]),
        DMatrix::from_row_slice(2, 1, &[0.0, 0.1]),
        DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        DMatrix::zeros(2, 2),
        NoiseModel::Constant(DMatrix::zeros(1, 1)),
        InputSet::bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap();
    let x = DVector::from_vec(vec![1.0, -2.0]);
    let u = DVector::from_element(1, 0.5);
    let (xn, y) = simulate_step(&sys, &x, &u, &mut rng);
    assert_eq!(xn, &sys.a * &x + &sys.b * &u);
    assert_eq!(y, &sys.c * &xn);
}

#[test]
fn single_precision_step() {
    use beliefplan::belief as b;
    let sys = b::LinearSystem::<f32>::new(
        DMatrix::identity(1, 1),
        DMatrix::identity(1, 1),
        DMatrix::identity(1, 1),
        DMatrix::zeros(1, 1),
        b::NoiseModel::Constant(DMatrix::identity(1, 1)),
        b::InputSet::bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap();
    let b0 = b::BeliefState::new(DVector::zeros(1), DMatrix::identity(1, 1)).unwrap();
    let next = b::mlo_step(&sys, &b0, &DVector::zeros(1)).unwrap();
    assert_eq!(next.cov[(0, 0)], 0.5f32);
}
