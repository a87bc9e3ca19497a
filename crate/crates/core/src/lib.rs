//! Extreme nonlocality in bipartite Bell scenarios.
//!
//! Local content of behaviors, tables of zeros and their LHV realizability,
//! enumeration of critical nonlocal tables up to relabeling, nonlocal games
//! with classical values and lifts, NPA outer bounds, and explicit quantum
//! strategies built from commuting Pauli observables.

pub mod error;
pub mod extremality;
pub mod games;
pub mod io;
pub mod npa;
pub mod numerics;
pub mod polytope;
pub mod quantum;
pub mod scenario;
pub mod solvers;
pub mod symmetry;
pub mod zeros;

pub use error::{Error, Result};
pub use numerics::Rational;
pub use scenario::{Behavior, Cell, DeterministicStrategy, Scenario};
