//! Chance-constrained temporal formulas: syntax, parsing, and predicate
//! semantics on Gaussian beliefs.

mod formula;
mod parser;
mod predicate;
mod quantile;
mod subformula;

pub use formula::{Atom, Formula};
pub use parser::{parse_formula, FormulaParser};
pub use predicate::{chance_margin, pred_holds, Predicate};
pub use quantile::{normal_cdf, normal_quantile};
pub use subformula::{extract_subformulas, AbstractedFormula, Skeleton};
