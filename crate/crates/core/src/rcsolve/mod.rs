//! Rank-constrained LMI feasibility by alternating projections, and
//! bisection on the cost bound.

mod ap;
mod bisect;
mod lifted;
mod problem;

pub use ap::{alternating_solve, convex_feasibility, SolveReport, SolveStatus, SolverOptions};
pub use bisect::{bisect_beta, BisectResult, Probe};
pub use lifted::{build_analysis, build_lifted, LiftedCheck, LiftedLayout, LmiProblem};
pub use problem::{AffineLmi, Cone, ConeBlock, Entry, LinearConstraint, ProblemBuilder, RcProblem};
