//! Temporal-logic synthesis of open-loop plans in Gaussian belief space.

pub mod abstraction;
pub mod belief;
pub mod bmc;
pub mod error;
pub mod fsearch;
pub mod io;
pub mod linalg;
pub mod logic;
pub mod lp;
pub mod scalar;
pub mod scenario;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases for the common case.
pub type BeliefState = belief::BeliefState<f64>;
pub type LinearSystem = belief::LinearSystem<f64>;
pub type Predicate = logic::Predicate<f64>;
pub type Formula = logic::Formula<f64>;
pub type Kripke = abstraction::Kripke<f64>;
pub type Plan = fsearch::Plan<f64>;
pub type Scenario = scenario::Scenario<f64>;
pub type SynthesisResult = synth::SynthesisResult<f64>;
