//! Petz-Augustin means, Petz capacities and CES Fisher-market equilibria.
//!
//! The central object is the Petz-Augustin mean of a weighted family of
//! density matrices, computed by a fixed-point iteration that is a strict
//! contraction in the Thompson metric for `alpha > 1/2`. The same machinery
//! drives a mirror-descent solver for the Petz capacity and a tâtonnement
//! process with heterogeneous, asynchronous updates for CES Fisher markets.

// `!(x > 0.0)` is the NaN-rejecting test throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augustin;
pub mod capacity;
pub mod divergences;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod oracles;
pub mod trace;

pub use augustin::{IterateState, SolveOptions, SolveReport};
pub use capacity::{CapacityProblem, CapacityState};
pub use divergences::{
    classical_objective, petz_renyi_divergence, quantum_objective, AugustinProblem,
    ClassicalAugustinProblem, ExtendedReal,
};
pub use error::{Error, Result};
pub use fisher::{FisherMarket, PriceState, UpdateSchedule};
pub use linalg::{DensityMatrix, HermitianMatrix, PositiveVector, Spectrum};
