//! Sampling-based realization of a lasso as a belief trajectory.

mod control;
mod regions;
mod search;
mod tree;

pub use control::{
    belief_from_vector, belief_jacobians, belief_vector, blqr, clamp_control, clamp_control_lp, dare, dare_residual,
    equilibrium, loop_controllability, loop_controls, lqr, BlqrWeights, LoopControls, RICCATI_MAX_ITERS,
};
pub use regions::Regions;
pub use search::{feas_run, fsearch, propagate, Context, FsearchOutcome, Plan, SearchParams};
pub use tree::{best_nearest, drain, SearchTree, Vertex};
