//! Linear and semidefinite programming.

mod lp;
mod sdp;

pub use lp::{lp_solve, Constraint, LinearProgram, LpScalar, LpSolution, Sense};
pub use sdp::{
    parametrize, sdp_max_min_eigenvalue, sdp_maximize, AffineFamily, EntryConstraint,
    LinearEquality, Parametrization, SdpFeasibilityProblem, SdpMaximum, SdpOutcome, SymEntries,
    Verdict, FEASIBLE_THRESHOLD, INFEASIBLE_THRESHOLD,
};
pub(crate) use sdp::{max_min_eigenvalue_family, maximize_family};
