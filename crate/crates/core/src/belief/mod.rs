//! Linear-Gaussian system model and belief dynamics.

mod dynamics;
mod noise;
mod state;
mod system;

pub(crate) use dynamics::mlo_step_unchecked;
pub use dynamics::{kalman_update, mlo_rollout, mlo_step, sample_state, simulate_step, INPUT_SLACK};
pub use noise::{noise_cov, NoiseModel, PolyTerm};
pub use state::BeliefState;
pub use system::{InputSet, LinearSystem};
