use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("expected a probability measure (total mass {mass})")]
    NotProbability { mass: f64 },

    #[error("marginals are not in convex order; no martingale coupling exists")]
    InfeasibleOrder,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("pooled measures differ beyond tolerance (max deviation {deviation})")]
    InfeasiblePooled { deviation: f64 },

    #[error("barycenter constraints are infeasible: x = {x} lies outside the pooled support hull [{lo}, {hi}]")]
    InfeasibleBarycenters { x: f64, lo: f64, hi: f64 },

    #[error("barycenter repair failed; residuals {residuals:?}")]
    RepairFailed { residuals: Vec<f64> },

    #[error("optimizer is not unique (two optimal vertices within {value_gap} in value)")]
    NonUniqueOptimizer { value_gap: f64 },

    #[error("cost is not defined at ({x}, {y})")]
    CostNotDefined { x: f64, y: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
