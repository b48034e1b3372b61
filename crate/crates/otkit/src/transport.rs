//! Classical discrete optimal transport and cyclical monotonicity.

use crate::cost::PointwiseCost;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::measure::DiscreteMeasure;
use crate::monotone::{CheckMethod, MonotonicityReport};
use crate::plan::TransportPlan;
use crate::tol;

/// Solves the transport problem between `mu` and `nu` for a pointwise cost.
/// Returns the optimal plan and its cost.
pub fn solve_ot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
) -> Result<(TransportPlan, f64)> {
    mu.ensure_probability()?;
    nu.ensure_probability()?;
    let lp = transport_lp(mu, nu, cost, false)?;
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::NumericalFailure(
                "transport LP reported infeasible despite equal masses".into(),
            ))
        }
        LpStatus::Unbounded => {
            return Err(Error::NumericalFailure("transport LP unbounded".into()))
        }
    }
    let plan = plan_from_primal(mu, nu, &sol.primal)?;
    Ok((plan, sol.value))
}

/// Assembles the marginal-constraint LP, optionally with per-row barycenter
/// (martingale) constraints `sum_j (y_j - x_i) pi_ij = 0`.
pub(crate) fn transport_lp(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
    martingale: bool,
) -> Result<LinearProgram> {
    let nx = mu.support_size();
    let ny = nu.support_size();
    let n = nx * ny;
    let mut objective = Vec::with_capacity(n);
    for &x in mu.atoms() {
        for &y in nu.atoms() {
            objective.push(cost.eval(x, y)?);
        }
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
    if martingale {
        for i in 0..nx {
            let mut row = vec![0.0; n];
            for j in 0..ny {
                row[i * ny + j] = nu.atoms()[j] - mu.atoms()[i];
            }
            constraints.push(row);
            rhs.push(0.0);
        }
    }
    Ok(LinearProgram {
        objective,
        constraints,
        rhs,
    })
}

pub(crate) fn plan_from_primal(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    primal: &[f64],
) -> Result<TransportPlan> {
    let ny = nu.support_size();
    let mass: Vec<Vec<f64>> = primal.chunks(ny).map(|c| c.to_vec()).collect();
    let plan = TransportPlan::new(mu.atoms().to_vec(), nu.atoms().to_vec(), mass)?;
    plan.validate_marginals(mu, nu, tol::FEASIBILITY)?;
    Ok(plan)
}

/// Enumerates every vertex of the transportation polytope between `mu` and
/// `nu` together with its cost. Subject to the vertex-enumeration guards.
pub fn enumerate_transport_plans(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
) -> Result<Vec<(TransportPlan, f64)>> {
    mu.ensure_probability()?;
    nu.ensure_probability()?;
    let lp = transport_lp(mu, nu, cost, false)?;
    crate::lp::enumerate_vertices(&lp)?
        .into_iter()
        .map(|v| Ok((plan_from_primal(mu, nu, &v.primal)?, v.value)))
        .collect()
}

/// Checks c-cyclical monotonicity of the support of a plan by exhaustive
/// enumeration of cycles up to `max_cycle` support points.
///
/// The gap is the largest positive saving of a cyclic shift,
/// `sum c(x_k, y_k) - sum c(x_k, y_{k+1})`; the plan is violated when the gap
/// exceeds `gap_tol`.
pub fn check_cyclical_monotone(
    plan: &TransportPlan,
    cost: &PointwiseCost,
    max_cycle: usize,
    gap_tol: f64,
) -> Result<MonotonicityReport> {
    if max_cycle < 2 {
        return Err(Error::InvalidInput(format!(
            "max_cycle {max_cycle} must be at least 2"
        )));
    }
    let support = plan.support();
    let s = support.len();
    let max_len = max_cycle.min(s);

    // tuple-count guard: sum over lengths of s! / (s - len)!
    let mut tuples: u128 = 0;
    for len in 2..=max_len {
        let mut p: u128 = 1;
        for v in (s - len + 1)..=s {
            p = p.saturating_mul(v as u128);
        }
        tuples = tuples.saturating_add(p);
        if tuples > 1_000_000 {
            return Err(Error::TooLarge(format!(
                "cycle enumeration would evaluate more than 10^6 tuples \
                 ({s} support points, cycles up to {max_len})"
            )));
        }
    }

    // cost values at support points and cross pairs, precomputed
    let xs: Vec<f64> = support.iter().map(|&(i, _)| plan.x_atoms()[i]).collect();
    let ys: Vec<f64> = support.iter().map(|&(_, j)| plan.y_atoms()[j]).collect();
    let mut c = vec![vec![0.0; s]; s];
    for a in 0..s {
        for b in 0..s {
            c[a][b] = cost.eval(xs[a], ys[b])?;
        }
    }

    let mut gap: f64 = 0.0;
    // Depth-first enumeration of ordered tuples of distinct support points.
    // Rotations of a cycle have equal value, so the first element is fixed to
    // the smallest index in the tuple.
    let mut stack: Vec<usize> = Vec::with_capacity(max_len);
    let mut used = vec![false; s];
    for first in 0..s {
        stack.push(first);
        used[first] = true;
        dfs_cycles(&c, first, &mut stack, &mut used, max_len, &mut gap);
        used[first] = false;
        stack.pop();
    }

    Ok(MonotonicityReport {
        is_violated: gap > gap_tol,
        gap: gap.max(0.0),
        competitors: Vec::new(),
        method: CheckMethod::CycleEnum,
    })
}

fn dfs_cycles(
    c: &[Vec<f64>],
    first: usize,
    stack: &mut Vec<usize>,
    used: &mut [bool],
    max_len: usize,
    gap: &mut f64,
) {
    if stack.len() >= 2 {
        // close the cycle back to the first element
        let mut saving = 0.0;
        for k in 0..stack.len() {
            let next = stack[(k + 1) % stack.len()];
            saving += c[stack[k]][stack[k]] - c[stack[k]][next];
        }
        if saving > *gap {
            *gap = saving;
        }
    }
    if stack.len() == max_len {
        return;
    }
    for cand in first + 1..c.len() {
        if used[cand] {
            continue;
        }
        stack.push(cand);
        used[cand] = true;
        dfs_cycles(c, first, stack, used, max_len, gap);
        used[cand] = false;
        stack.pop();
    }
}
