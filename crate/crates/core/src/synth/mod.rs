//! Counterexample-guided synthesis loop, plan validation and Monte Carlo
//! execution.

mod check;
mod idprtl;
mod montecarlo;

pub use check::{check_plan, check_plan_with, PlanCheck, Violation, ViolationKind, DYNAMICS_TOL};
pub use idprtl::{id_prtl, Infeasibility, Problem, SynthesisOutcome, SynthesisResult, SynthesisStats};
pub use montecarlo::{monte_carlo, AtomFrequencies, MonteCarloReport, MC_FORMAT_VERSION};
