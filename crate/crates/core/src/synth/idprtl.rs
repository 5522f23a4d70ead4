use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::check::check_plan_with;
use crate::abstraction::{Blocklist, Kripke};
use crate::bmc::{find_lasso, BmcOutcome, LabelledGraph, LassoPath};
use crate::error::Result;
use crate::fsearch::{fsearch, Plan, Regions};
use crate::logic::{extract_subformulas, AbstractedFormula};
use crate::scalar::Scalar;
use crate::scenario::Scenario;

/// A scenario together with its abstraction.
pub struct Problem<'a, T: Scalar> {
    pub scenario: &'a Scenario<T>,
    pub formula: AbstractedFormula<T>,
    pub kripke: Kripke<T>,
    pub graph: LabelledGraph,
}

impl<'a, T: Scalar> Problem<'a, T> {
    pub fn new(scenario: &'a Scenario<T>) -> Result<Self> {
        let formula = extract_subformulas(&scenario.formula);
        let kripke = Kripke::build(&formula, &scenario.initial, &scenario.abstraction_params())?;
        let graph = LabelledGraph::from(&kripke);
        Ok(Problem {
            scenario,
            formula,
            kripke,
            graph,
        })
    }

    pub fn regions(&self, lasso: &LassoPath) -> Regions<T> {
        Regions::new(&self.kripke, lasso, &self.scenario.workspace)
    }
}

/// Why no plan was returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    /// The abstraction has no lasso from its initial cell at any bound.
    NoLasso,
    /// No unblocked satisfying lasso with `K ≤ k_max` remains.
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub enum SynthesisOutcome<T: Scalar> {
    Plan { plan: Plan<T>, lasso: LassoPath },
    Infeasible(Infeasibility),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisStats {
    pub lassos_proposed: usize,
    pub lassos_blocked: usize,
    pub search_iterations: usize,
    pub tree_vertices: usize,
    pub seed: u64,
    pub k_max: usize,
    pub iterations_per_segment: usize,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult<T: Scalar> {
    pub outcome: SynthesisOutcome<T>,
    pub stats: SynthesisStats,
    pub wall_time: Duration,
}

impl<T: Scalar> SynthesisResult<T> {
    pub fn plan(&self) -> Option<(&Plan<T>, &LassoPath)> {
        match &self.outcome {
            SynthesisOutcome::Plan { plan, lasso } => Some((plan, lasso)),
            SynthesisOutcome::Infeasible(_) => None,
        }
    }

    /// Process exit code: 0 plan, 2 infeasible in the abstraction, 3 search
    /// budget exhausted.
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            SynthesisOutcome::Plan { .. } => 0,
            SynthesisOutcome::Infeasible(Infeasibility::NoLasso) => 2,
            SynthesisOutcome::Infeasible(Infeasibility::BudgetExhausted) => 3,
        }
    }
}

/// Alternates lasso proposals and feasibility searches, blocking every
/// lasso the search cannot realize.
pub fn id_prtl<T: Scalar>(problem: &Problem<'_, T>) -> Result<SynthesisResult<T>> {
    let start = Instant::now();
    let sc = problem.scenario;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut blocklist = Blocklist::new();
    let mut stats = SynthesisStats {
        lassos_proposed: 0,
        lassos_blocked: 0,
        search_iterations: 0,
        tree_vertices: 0,
        seed: sc.seed,
        k_max: sc.k_max,
        iterations_per_segment: sc.params.iterations,
    };
    let outcome = loop {
        let lasso = match find_lasso(&problem.graph, &problem.formula.skeleton, sc.k_max, &blocklist) {
            BmcOutcome::Found(l) => l,
            BmcOutcome::Exhausted => break SynthesisOutcome::Infeasible(Infeasibility::BudgetExhausted),
            BmcOutcome::NoLasso => break SynthesisOutcome::Infeasible(Infeasibility::NoLasso),
        };
        stats.lassos_proposed += 1;
        log::info!(
            "lasso {}: cells {:?}, loop at {}",
            stats.lassos_proposed,
            lasso.cells,
            lasso.loop_index
        );
        let regions = problem.regions(&lasso);
        let found = fsearch(&sc.system, &sc.initial, &regions, &sc.cov_max, &sc.params, &mut rng)?;
        stats.search_iterations += found.iterations;
        stats.tree_vertices += found.vertices;
        if let Some(plan) = found.plan {
            if check_plan_with(&plan, &lasso, problem).is_ok() {
                break SynthesisOutcome::Plan { plan, lasso };
            }
        }
        log::info!(
            "lasso {} blocked after {} iterations, furthest position {}, {} closure attempts",
            stats.lassos_proposed,
            found.iterations,
            found.max_progress,
            found.closures
        );
        blocklist.block(&lasso);
        stats.lassos_blocked += 1;
    };
    Ok(SynthesisResult {
        outcome,
        stats,
        wall_time: start.elapsed(),
    })
}
