//! Bounds on maximal reachability probabilities in Markov decision processes.
//!
//! With the full model available, [`brtdp`] explores it guided by upper
//! bounds and collapses end components as they are found. With only a
//! sampling oracle ([`blackbox`]), [`dql`] learns bounds by delayed
//! Q-learning. [`solver`] holds exact reference solvers.

pub mod blackbox;
pub mod brtdp;
pub mod cli;
pub mod collapse;
pub mod dql;
pub mod generate;
pub mod graph;
pub mod io;
pub mod model;
pub mod models;
pub mod solver;

#[cfg(test)]
mod testutil;

pub use model::{ActionId, Distribution, Mdp, StateId, StateSet};
