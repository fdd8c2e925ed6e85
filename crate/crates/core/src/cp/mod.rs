//! Finite-domain constraint models and a propagation-based solver.

mod domain;
pub mod model;
pub mod solver;

pub use domain::Domain;
pub use model::{Constraint, Func, Labeling, Linear, Model, Rel, Sense, VarIdx};
pub use solver::{all_solutions, Propagator, Search, SearchStats};
