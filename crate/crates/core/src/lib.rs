//! A small rule-based logic programming system with tabling, a planner and
//! pluggable constraint solvers.

pub mod cp;
pub mod engine;
pub mod mip;
pub mod parser;
pub mod planner;
pub mod sat;
pub mod tabling;
pub mod term;

pub use engine::{Engine, EngineError, EngineOptions, Error, Output, Solution};
