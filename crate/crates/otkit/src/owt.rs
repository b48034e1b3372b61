//! Weak optimal transport for the two concrete cost families: costs linear in
//! the conditional law (which collapse to classical transport) and barycentric
//! costs `C(x, p) = theta(mean p)` for convex piecewise-linear `theta`.

use crate::cost::{PiecewiseLinear, PointwiseCost};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::measure::DiscreteMeasure;
use crate::plan::TransportPlan;
use crate::transport::{plan_from_primal, solve_ot};

/// Weak transport with `C(x, p) = ∫ c(x, y) p(dy)`.
///
/// Linearity collapses the weak problem to classical transport, so this is a
/// delegation; the identity is pinned by tests.
pub fn solve_owt_linear(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
) -> Result<(TransportPlan, f64)> {
    solve_ot(mu, nu, cost)
}

/// Weak transport with barycentric cost `C_theta(x, p) = theta(mean p)`.
///
/// Solved exactly as an epigraph LP: auxiliary variables `t_i` dominate every
/// affine piece of `theta` evaluated at the row barycenter, and the objective
/// is `sum_i mu_i t_i`. The `t_i` are shifted by the minimum of `theta` over
/// the support hull of `nu` so they stay nonnegative.
pub fn solve_owt_barycentric(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    theta: &PiecewiseLinear,
) -> Result<(TransportPlan, f64)> {
    mu.ensure_probability()?;
    nu.ensure_probability()?;
    let nx = mu.support_size();
    let ny = nu.support_size();
    let pieces = &theta.pieces;
    let np = pieces.len();
    let (y_lo, y_hi) = nu.support_hull().ok_or(Error::ZeroMass)?;
    let shift = theta.min_on(y_lo, y_hi);

    // variables: pi (nx*ny) | t' (nx) | slacks (nx*np)
    let n_pi = nx * ny;
    let n = n_pi + nx + nx * np;
    let t_off = n_pi;
    let s_off = n_pi + nx;

    let mut objective = vec![0.0; n];
    for i in 0..nx {
        objective[t_off + i] = mu.weights()[i];
    }

    let mut constraints = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..nx {
        let mut row = vec![0.0; n];
        for j in 0..ny {
            row[i * ny + j] = 1.0;
        }
        constraints.push(row);
        rhs.push(mu.weights()[i]);
    }
    for j in 0..ny {
        let mut row = vec![0.0; n];
        for i in 0..nx {
            row[i * ny + j] = 1.0;
        }
        constraints.push(row);
        rhs.push(nu.weights()[j]);
    }
    for i in 0..nx {
        let mi = mu.weights()[i];
        for (p, &(a, b)) in pieces.iter().enumerate() {
            // mu_i t_i >= a sum_j y_j pi_ij + b mu_i, with t_i = t'_i + shift
            let mut row = vec![0.0; n];
            row[t_off + i] = mi;
            for j in 0..ny {
                row[i * ny + j] = -a * nu.atoms()[j];
            }
            row[s_off + i * np + p] = -1.0;
            constraints.push(row);
            rhs.push((b - shift) * mi);
        }
    }

    let sol = solve_lp(&LinearProgram {
        objective,
        constraints,
        rhs,
    })?;
    match sol.status {
        LpStatus::Optimal => {}
        other => {
            return Err(Error::NumericalFailure(format!(
                "barycentric epigraph LP returned {other:?}"
            )))
        }
    }
    let plan = plan_from_primal(mu, nu, &sol.primal[..n_pi])?;
    Ok((plan, sol.value + shift))
}

/// The barycentric objective value of a given plan,
/// `sum_i mu_i theta(mean pi_{x_i})`.
pub fn barycentric_value(plan: &TransportPlan, theta: &PiecewiseLinear) -> f64 {
    let mu = plan.mu();
    let mut acc = 0.0;
    for i in 0..plan.x_atoms().len() {
        if let Some(row) = plan.disintegration(i) {
            acc += mu.weights()[i] * theta.eval(row.mean().expect("positive row"));
        }
    }
    acc
}
