//! Martingale optimal transport on the real line.

use crate::cost::PointwiseCost;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpStatus};
use crate::measure::{convex_order, DiscreteMeasure};
use crate::plan::TransportPlan;
use crate::tol;
use crate::transport::{plan_from_primal, transport_lp};

/// A transport plan whose martingale property has been verified: every
/// positive-mass row has barycenter equal to its x-atom.
#[derive(Debug, Clone)]
pub struct MartingalePlan {
    plan: TransportPlan,
}

impl MartingalePlan {
    /// Wraps a plan after verifying `|sum_j y_j pi_ij - x_i mu_i| <= tol` on
    /// every row.
    pub fn try_new(plan: TransportPlan, tol: f64) -> Result<Self> {
        for i in 0..plan.x_atoms().len() {
            let weighted: f64 = plan.mass()[i]
                .iter()
                .zip(plan.y_atoms())
                .map(|(m, y)| m * y)
                .sum();
            let dev = (weighted - plan.x_atoms()[i] * plan.row_mass(i)).abs();
            if dev > tol {
                return Err(Error::NumericalFailure(format!(
                    "row {i} violates the martingale constraint by {dev}"
                )));
            }
        }
        Ok(Self { plan })
    }

    pub fn plan(&self) -> &TransportPlan {
        &self.plan
    }

    pub fn into_plan(self) -> TransportPlan {
        self.plan
    }
}

/// Checks whether every positive-mass row's barycenter deviates from its
/// x-atom by at most `tol`.
pub fn is_martingale(plan: &TransportPlan, tol: f64) -> bool {
    (0..plan.x_atoms().len()).all(|i| match plan.disintegration(i) {
        Some(row) => (row.mean().expect("positive row mass") - plan.x_atoms()[i]).abs() <= tol,
        None => true,
    })
}

/// Solves martingale optimal transport between `mu` and `nu`.
///
/// Feasibility is pre-checked via convex order (Strassen), which yields a
/// semantically meaningful error instead of LP infeasibility.
pub fn solve_mot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
) -> Result<(MartingalePlan, f64)> {
    mu.ensure_probability()?;
    nu.ensure_probability()?;
    if !convex_order(mu, nu)? {
        return Err(Error::InfeasibleOrder);
    }
    let lp = transport_lp(mu, nu, cost, true)?;
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::NumericalFailure(
                "martingale LP infeasible although the marginals are in convex order".into(),
            ))
        }
        LpStatus::Unbounded => {
            return Err(Error::NumericalFailure("martingale LP unbounded".into()))
        }
    }
    let plan = plan_from_primal(mu, nu, &sol.primal)?;
    Ok((MartingalePlan::try_new(plan, tol::FEASIBILITY)?, sol.value))
}

/// Enumerates every vertex of the martingale transport polytope between `mu`
/// and `nu` together with its cost. Feasibility is pre-checked via convex
/// order; the enumeration guards of the LP module apply.
pub fn enumerate_martingale_plans(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
) -> Result<Vec<(MartingalePlan, f64)>> {
    mu.ensure_probability()?;
    nu.ensure_probability()?;
    if !convex_order(mu, nu)? {
        return Err(Error::InfeasibleOrder);
    }
    let lp = transport_lp(mu, nu, cost, true)?;
    crate::lp::enumerate_vertices(&lp)?
        .into_iter()
        .map(|v| {
            let plan = plan_from_primal(mu, nu, &v.primal)?;
            Ok((MartingalePlan::try_new(plan, tol::FEASIBILITY)?, v.value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::solve_ot;

    fn half(a: f64, b: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(vec![a, b], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn dirac_source_is_forced() {
        let mu = DiscreteMeasure::dirac(0.0);
        let nu = half(-1.0, 1.0);
        let (plan, value) = solve_mot(&mu, &nu, &PointwiseCost::Abs).unwrap();
        assert!(plan.plan().disintegration(0).unwrap().approx_eq(&nu, 1e-10));
        // ½(c(0,-1) + c(0,1))
        assert!((value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_by_two_barycenters_force_the_plan() {
        // mean constraints force rows (3/4, 1/4) and (1/4, 3/4); the value is
        // ½(¾·1 + ¼·3) + ½(¼·3 + ¾·1) = 1.5
        let mu = half(-1.0, 1.0);
        let nu = half(-2.0, 2.0);
        let (plan, value) = solve_mot(&mu, &nu, &PointwiseCost::Abs).unwrap();
        assert!((value - 1.5).abs() < 1e-9);
        assert!((plan.plan().entry(0, 0) - 0.375).abs() < 1e-9);
        assert!((plan.plan().entry(0, 1) - 0.125).abs() < 1e-9);
        assert!((plan.plan().entry(1, 0) - 0.125).abs() < 1e-9);
        assert!((plan.plan().entry(1, 1) - 0.375).abs() < 1e-9);
    }

    #[test]
    fn martingale_value_dominates_transport_value() {
        let mut rng = crate::testutil::rng(31);
        for _ in 0..25 {
            let (mu, nu) = crate::testutil::random_convex_order_pair(&mut rng, 4, 6);
            let (_, v_mot) = solve_mot(&mu, &nu, &PointwiseCost::Square).unwrap();
            let (_, v_ot) = solve_ot(&mu, &nu, &PointwiseCost::Square).unwrap();
            assert!(v_mot >= v_ot - 1e-9);
        }
    }

    #[test]
    fn infeasible_order_is_reported() {
        let mu = half(-1.0, 1.0);
        let nu = DiscreteMeasure::dirac(0.0);
        assert!(matches!(
            solve_mot(&mu, &nu, &PointwiseCost::Abs),
            Err(Error::InfeasibleOrder)
        ));
    }

    #[test]
    fn is_martingale_examples() {
        let (plan, _) = solve_mot(&half(-1.0, 1.0), &half(-2.0, 2.0), &PointwiseCost::Abs).unwrap();
        assert!(is_martingale(plan.plan(), 1e-8));

        // product coupling: both rows have mean 0, but the x-atoms are ±1
        let product = TransportPlan::new(
            vec![-1.0, 1.0],
            vec![-2.0, 2.0],
            vec![vec![0.25, 0.25], vec![0.25, 0.25]],
        )
        .unwrap();
        assert!(!is_martingale(&product, 1e-8));

        // dirac times a centered measure
        let plan = TransportPlan::new(vec![0.0], vec![-1.0, 1.0], vec![vec![0.5, 0.5]]).unwrap();
        assert!(is_martingale(&plan, 1e-8));
    }

    #[test]
    fn fine_dilations_stay_certified() {
        // dilated target atoms sit 2*eps apart, making nearly parallel LP
        // columns; the solve must stay certified and agree with the exact
        // rational solver all the way down
        let mu = half(-1.0, 1.0);
        let nu0 = half(-2.0, 2.0);
        for k in 12..=20 {
            let eps = 0.5f64.powi(k);
            let nu = crate::measure::dilate(&nu0, eps).unwrap();
            let (plan, value) = solve_mot(&mu, &nu, &PointwiseCost::Abs).unwrap();
            assert!(is_martingale(plan.plan(), 1e-8));
            let lp = transport_lp(&mu, &nu, &PointwiseCost::Abs, true).unwrap();
            let exact = crate::lp::solve_lp_rational(&lp).unwrap();
            assert!(
                (value - exact.value).abs() < 1e-9,
                "k={k}: float {value} vs exact {}",
                exact.value
            );
        }
    }

    #[test]
    fn solver_output_is_a_verified_martingale_plan() {
        let mut rng = crate::testutil::rng(32);
        for _ in 0..25 {
            let (mu, nu) = crate::testutil::random_convex_order_pair(&mut rng, 4, 6);
            let (plan, _) = solve_mot(&mu, &nu, &PointwiseCost::Abs).unwrap();
            assert!(is_martingale(plan.plan(), 1e-8));
        }
    }
}
