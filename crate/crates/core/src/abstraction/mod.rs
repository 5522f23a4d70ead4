//! Sign-cell abstraction of belief space and its Kripke structure.

mod blocklist;
mod cells;
mod kripke;
mod polytope;

pub use blocklist::{block_lasso, Blocklist};
pub use cells::{abstract_belief, enclosure, Basis, Cell, Sign, Workspace};
pub use kripke::{
    one_step_reach, AbstractionParams, DumpCell, Kripke, KripkeDump, LabelMask, KRIPKE_FORMAT_VERSION, MAX_APS,
};
pub use polytope::{polytopes_intersect, within_reach, Polytope};
