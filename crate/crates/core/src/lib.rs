//! LP-based verification of cascaded linear assume/guarantee contracts.
//!
//! * [`lp`]: dense simplex solver and small-polyhedron vertex enumeration.
//! * [`contracts`]: linear contracts, cascades, and their JSON file format.
//! * [`refinement`]: does `C₁ ⊗ C₂` refine `C`? One LP per conclusion row.
//! * [`satisfaction`]: does an affine closed loop implement a contract?
//! * [`casestudy`]: the car-follower example, from parameters to Monte-Carlo traces.

pub mod battery;
pub mod casestudy;
pub mod contracts;
pub mod exec;
pub mod lp;
pub mod mat;
pub mod refinement;
pub mod satisfaction;
pub mod verdict;

pub use contracts::{CascadeTriple, LinearContract};
pub use exec::Execution;
pub use lp::{LpOutcome, LpProblem, LpSolver, Simplex};
