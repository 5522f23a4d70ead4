//! Explicit-state bounded model checking over lasso-shaped paths.

mod ltl;
mod search;

pub use ltl::{eval_on_lasso, Ltl};
pub use search::{find_lasso, find_lasso_in, BmcOutcome, LabelledGraph, LassoPath};
