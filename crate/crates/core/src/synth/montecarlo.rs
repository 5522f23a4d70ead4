use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::idprtl::Problem;
use crate::belief::{kalman_update, sample_state, simulate_step, BeliefState};
use crate::bmc::LassoPath;
use crate::error::{Error, Result};
use crate::fsearch::Plan;
use crate::scalar::Scalar;

pub const MC_FORMAT_VERSION: u32 = 1;

/// Per-step statistics of one named atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomFrequencies {
    pub name: String,
    /// The chance constraint holds on the planned belief.
    pub planned: Vec<bool>,
    /// Fraction of rollouts whose true state satisfies the half-space.
    pub true_state: Vec<f64>,
    /// Fraction of rollouts whose filtered belief satisfies the chance
    /// constraint.
    pub belief: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub format_version: u32,
    pub rollouts: usize,
    pub seed: u64,
    pub steps: usize,
    pub atoms: Vec<AtomFrequencies>,
    /// Fraction of rollouts whose filtered belief lies in the planned
    /// region.
    pub region: Vec<f64>,
}

struct Rollout {
    true_state: Vec<Vec<bool>>,
    belief: Vec<Vec<bool>>,
    region: Vec<bool>,
}

/// Executes the open-loop controls on `rollouts` sampled trajectories with
/// a Kalman filter in the loop. Rollout `i` uses seed `seed + i`.
pub fn monte_carlo<T: Scalar>(
    plan: &Plan<T>,
    lasso: &LassoPath,
    problem: &Problem<'_, T>,
    rollouts: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    if rollouts == 0 {
        return Err(Error::scenario("rollouts", "must be at least 1"));
    }
    let sc = problem.scenario;
    let sys = &sc.system;
    let regions = problem.regions(lasso);
    let steps = plan.beliefs.len();
    let atoms = &sc.atoms;
    let record = |x: &nalgebra::DVector<T>, b: &BeliefState<T>, t: usize, r: &mut Rollout| {
        r.true_state
            .push(atoms.iter().map(|(_, p)| p.satisfied_by(x)).collect());
        r.belief.push(atoms.iter().map(|(_, p)| p.holds_unchecked(b)).collect());
        r.region.push(regions.conforms(b, plan.index_map[t]));
    };
    let runs: Vec<Rollout> = (0..rollouts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut r = Rollout {
                true_state: Vec::with_capacity(steps),
                belief: Vec::with_capacity(steps),
                region: Vec::with_capacity(steps),
            };
            let mut x = sample_state(&sc.initial, &mut rng);
            let mut b = plan.beliefs[0].clone();
            record(&x, &b, 0, &mut r);
            for (t, u) in plan.controls.iter().enumerate() {
                let (x_next, y) = simulate_step(sys, &x, u, &mut rng);
                b = kalman_update(sys, &b, u, &y)?;
                x = x_next;
                record(&x, &b, t + 1, &mut r);
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let frac = |count: usize| count as f64 / rollouts as f64;
    let atoms_out = atoms
        .iter()
        .enumerate()
        .map(|(j, (name, pred))| AtomFrequencies {
            name: name.clone(),
            planned: plan.beliefs.iter().map(|b| pred.holds_unchecked(b)).collect(),
            true_state: (0..steps)
                .map(|t| frac(runs.iter().filter(|r| r.true_state[t][j]).count()))
                .collect(),
            belief: (0..steps)
                .map(|t| frac(runs.iter().filter(|r| r.belief[t][j]).count()))
                .collect(),
        })
        .collect();
    Ok(MonteCarloReport {
        format_version: MC_FORMAT_VERSION,
        rollouts,
        seed,
        steps,
        atoms: atoms_out,
        region: (0..steps)
            .map(|t| frac(runs.iter().filter(|r| r.region[t]).count()))
            .collect(),
    })
}

impl MonteCarloReport {
    pub fn atom(&self, name: &str) -> Option<&AtomFrequencies> {
        self.atoms.iter().find(|a| a.name == name)
    }
}
