//! Global numerical tolerances.
//!
//! These are fixed once for the whole crate so that every module agrees on
//! what "equal" means. Equality constraints coming out of the LP solver are
//! certified to [`FEASIBILITY`]; everything downstream inherits that.

/// Atoms closer than this are merged during canonicalization.
pub const ATOM_MERGE: f64 = 1e-12;

/// A measure is a probability measure when |mass - 1| stays below this.
pub const PROBABILITY_MASS: f64 = 1e-10;

/// Tolerance on means and potential dominance in convex-order tests.
pub const CONVEX_ORDER: f64 = 1e-9;

/// Equality-constraint feasibility (LP rows, marginals, martingale rows).
pub const FEASIBILITY: f64 = 1e-8;

/// Default threshold above which a monotonicity gap counts as a violation.
pub const GAP: f64 = 1e-8;

/// Plan entries above this belong to the support.
pub const SUPPORT: f64 = 1e-10;

/// Agreement required between the simplex value and vertex enumeration.
pub const VERTEX_AGREE: f64 = 1e-7;
