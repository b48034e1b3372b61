//! Discrete optimal transport on the real line, with martingale and weak
//! variants.
//!
//! The crate revolves around three kinds of objects:
//!
//! * [`DiscreteMeasure`] — finitely supported measures with Wasserstein
//!   metrics, convex order and order-preserving perturbations,
//! * [`TransportPlan`] / [`MartingalePlan`] — couplings on atom grids,
//!   produced by the LP-backed solvers in [`transport`], [`mot`] and [`owt`],
//! * monotonicity checkers and competitor constructions in [`monotone`] and
//!   [`competitors`], which turn optimality criteria into executable tests,
//!   plus the stability experiment harness in [`stability`].
//!
//! Everything is pure and deterministic: values are immutable after
//! construction, solvers follow Bland's rule, and randomized search is seeded.
//! Concurrent use on shared inputs is safe.

pub mod competitors;
pub mod cost;
pub mod error;
pub mod lp;
pub mod measure;
pub mod monotone;
pub mod mot;
pub mod owt;
pub mod plan;
pub mod stability;
pub mod tol;
pub mod transport;

#[cfg(test)]
pub(crate) mod testutil;

pub use cost::{CostSpec, GenericCost, PiecewiseLinear, PointwiseCost};
pub use error::{Error, Result};
pub use lp::{enumerate_vertices, solve_lp, LinearProgram, LpSolution, LpStatus};
pub use measure::{bin, convex_order, dilate, pooled, wasserstein, DiscreteMeasure};
pub use monotone::{
    check_c_monotone, check_mart_c_monotone, hunt_violation_generic, CandidateSet, CheckMethod,
    MonotonicityReport,
};
pub use mot::{enumerate_martingale_plans, is_martingale, solve_mot, MartingalePlan};
pub use owt::{solve_owt_barycentric, solve_owt_linear};
pub use plan::TransportPlan;
pub use transport::{check_cyclical_monotone, enumerate_transport_plans, solve_ot};
