//! Max–min constellation design.
//!
//! Constraints say that the superimposed points of two histograms with
//! different outputs must be at least `λ · |g(h) - g(h')|²` apart; the
//! solver maximizes λ over constellations with `Σ |x_i|² ≤ 1`.

mod constraints;
mod document;
mod solver;
mod verify;

pub use constraints::{
    build_constraints_full, build_constraints_reduced, build_constraints_reduced_sampled, Constraint, ConstraintForm,
    ConstraintSet, DistanceMetric,
};
pub use document::{DesignDocument, PointRecord};
pub use solver::{lambda_of, solve_maxmin, DesignResult, Diagnostics, SolverConfig};
pub use verify::{verify_no_overlap, verify_superpositions, Overlap, OverlapReport};
