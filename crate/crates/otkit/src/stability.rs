//! Stability experiments: perturb the marginals and the cost along a
//! schedule, re-solve, and track values, plans and monotonicity gaps against
//! the unperturbed limit instance.
//!
//! Perturbations are binning of `mu` (convex-order decreasing) and dilation
//! of `nu` (convex-order increasing), so every perturbed pair stays feasible
//! for martingale transport by construction. Cost perturbations add a
//! uniformly bounded bump `delta_k * g` with `g = 1`.

use std::sync::Arc;

use crate::cost::{CostSpec, PointwiseCost};
use crate::error::{Error, Result};
use crate::lp::enumerate_vertices;
use crate::measure::{bin, convex_order, dilate, wasserstein, DiscreteMeasure};
use crate::monotone::{check_subsets, CandidateSet};
use crate::mot::solve_mot;
use crate::plan::{plan_w1, TransportPlan};
use crate::tol;
use crate::transport::{solve_ot, transport_lp};

/// One perturbation step: binning mesh for `mu`, dilation radius for `nu`,
/// and the amplitude of the cost bump. Zero disables a perturbation.
#[derive(Debug, Clone, Copy)]
pub struct ScheduleStep {
    pub mu_mesh: f64,
    pub nu_dilation: f64,
    pub cost_bump: f64,
}

/// A perturbation schedule with every sequence non-increasing.
#[derive(Debug, Clone)]
pub struct PerturbationSchedule {
    pub steps: Vec<ScheduleStep>,
}

impl PerturbationSchedule {
    pub fn new(steps: Vec<ScheduleStep>) -> Result<Self> {
        for w in steps.windows(2) {
            if w[1].mu_mesh > w[0].mu_mesh + 1e-15
                || w[1].nu_dilation > w[0].nu_dilation + 1e-15
                || w[1].cost_bump > w[0].cost_bump + 1e-15
            {
                return Err(Error::InvalidInput(
                    "schedule sequences must be non-increasing".into(),
                ));
            }
        }
        Ok(Self { steps })
    }

    /// Geometric schedule: step `k` (1-based) uses `ratio^k` for all three
    /// perturbations.
    pub fn geometric(num_steps: usize, ratio: f64) -> Result<Self> {
        if !(0.0 < ratio && ratio < 1.0) {
            return Err(Error::InvalidInput(format!(
                "geometric ratio {ratio} must lie in (0, 1)"
            )));
        }
        Self::new(
            (1..=num_steps)
                .map(|k| {
                    let v = ratio.powi(k as i32);
                    ScheduleStep {
                        mu_mesh: v,
                        nu_dilation: v,
                        cost_bump: v,
                    }
                })
                .collect(),
        )
    }

    /// All perturbations switched off; useful as a control run.
    pub fn zero(num_steps: usize) -> Self {
        Self {
            steps: vec![
                ScheduleStep {
                    mu_mesh: 0.0,
                    nu_dilation: 0.0,
                    cost_bump: 0.0,
                };
                num_steps
            ],
        }
    }
}

/// Per-step record of a stability run.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub k: usize,
    pub w1_mu: f64,
    pub w1_nu: f64,
    pub value: f64,
    pub value_gap: f64,
    pub plan_dist: Option<f64>,
    pub mono_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMode {
    Value,
    Plan,
    Monotonicity,
}

/// Full record of a stability experiment.
#[derive(Debug, Clone)]
pub struct StabilityRun {
    pub mode: StabilityMode,
    pub records: Vec<StepRecord>,
    pub limit_value: f64,
    pub limit_plan: TransportPlan,
    /// Monotonicity gap of the limit plan (monotonicity mode only).
    pub limit_mono_gap: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

fn perturbed_instance(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
    step: ScheduleStep,
) -> Result<(DiscreteMeasure, DiscreteMeasure, PointwiseCost)> {
    let mu_k = if step.mu_mesh > 0.0 {
        bin(mu, step.mu_mesh)?
    } else {
        mu.clone()
    };
    let nu_k = if step.nu_dilation > 0.0 {
        dilate(nu, step.nu_dilation)?
    } else {
        nu.clone()
    };
    if !convex_order(&mu_k, &nu_k)? {
        return Err(Error::NumericalFailure(
            "perturbed pair left convex order; binning/dilation invariant broken".into(),
        ));
    }
    let cost_k = if step.cost_bump != 0.0 {
        cost.bumped(step.cost_bump, Arc::new(|_, _| 1.0))
    } else {
        cost.clone()
    };
    Ok((mu_k, nu_k, cost_k))
}

/// Solves the perturbed martingale problem at every step and records the
/// value gaps against the limit instance. Passes when the final gap is within
/// `tolerance`.
pub fn run_value_stability(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
    schedule: &PerturbationSchedule,
    tolerance: f64,
) -> Result<StabilityRun> {
    let (limit_plan, limit_value) = solve_mot(mu, nu, cost)?;
    let mut records = Vec::with_capacity(schedule.steps.len());
    for (k, &step) in schedule.steps.iter().enumerate() {
        let (mu_k, nu_k, cost_k) = perturbed_instance(mu, nu, cost, step)?;
        let (_, value) = solve_mot(&mu_k, &nu_k, &cost_k)?;
        records.push(StepRecord {
            k: k + 1,
            w1_mu: wasserstein(&mu_k, mu, 1.0)?,
            w1_nu: wasserstein(&nu_k, nu, 1.0)?,
            value,
            value_gap: (value - limit_value).abs(),
            plan_dist: None,
            mono_gap: None,
        });
    }
    let passed = records
        .last()
        .map_or(true, |r| r.value_gap <= tolerance);
    Ok(StabilityRun {
        mode: StabilityMode::Value,
        records,
        limit_value,
        limit_plan: limit_plan.into_plan(),
        limit_mono_gap: None,
        tolerance,
        passed,
    })
}

/// Tracks the l1-Wasserstein distance between the perturbed optimizers and
/// the limit optimizer. The instance must have a unique optimizer, verified
/// by vertex enumeration; otherwise `NonUniqueOptimizer` is returned.
pub fn run_plan_stability(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
    schedule: &PerturbationSchedule,
    tolerance: f64,
) -> Result<StabilityRun> {
    verify_unique_optimizer(mu, nu, cost)?;
    let (limit_plan, limit_value) = solve_mot(mu, nu, cost)?;
    let limit_plan = limit_plan.into_plan();
    let mut records = Vec::with_capacity(schedule.steps.len());
    for (k, &step) in schedule.steps.iter().enumerate() {
        let (mu_k, nu_k, cost_k) = perturbed_instance(mu, nu, cost, step)?;
        let (plan_k, value) = solve_mot(&mu_k, &nu_k, &cost_k)?;
        let dist = plan_w1(plan_k.plan(), &limit_plan)?;
        records.push(StepRecord {
            k: k + 1,
            w1_mu: wasserstein(&mu_k, mu, 1.0)?,
            w1_nu: wasserstein(&nu_k, nu, 1.0)?,
            value,
            value_gap: (value - limit_value).abs(),
            plan_dist: Some(dist),
            mono_gap: None,
        });
    }
    let passed = records
        .last()
        .map_or(true, |r| r.plan_dist.unwrap_or(0.0) <= tolerance);
    Ok(StabilityRun {
        mode: StabilityMode::Plan,
        records,
        limit_value,
        limit_plan,
        limit_mono_gap: None,
        tolerance,
        passed,
    })
}

/// Certifies optimizer uniqueness by enumerating the vertices of the
/// martingale transport polytope: two distinct vertices within 1e-9 of the
/// optimal value reject the instance.
pub fn verify_unique_optimizer(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
) -> Result<()> {
    if !convex_order(mu, nu)? {
        return Err(Error::InfeasibleOrder);
    }
    let lp = transport_lp(mu, nu, cost, true)?;
    let vertices = enumerate_vertices(&lp)?;
    if vertices.is_empty() {
        return Err(Error::NumericalFailure(
            "no vertex found in a feasible martingale polytope".into(),
        ));
    }
    let best = vertices
        .iter()
        .map(|v| v.value)
        .fold(f64::INFINITY, f64::min);
    let optimal: Vec<_> = vertices
        .iter()
        .filter(|v| v.value <= best + 1e-9)
        .collect();
    if optimal.len() > 1 {
        return Err(Error::NonUniqueOptimizer {
            value_gap: optimal[1].value - optimal[0].value,
        });
    }
    Ok(())
}

/// Records the martingale monotonicity gap (disintegration subsets of size
/// up to 3) of every perturbed optimizer under its own perturbed cost, plus
/// the gap of the limit plan under the limit cost. Passes when every gap is
/// within `tolerance`.
pub fn run_monotonicity_stability(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
    schedule: &PerturbationSchedule,
    tolerance: f64,
) -> Result<StabilityRun> {
    let (limit_plan, limit_value) = solve_mot(mu, nu, cost)?;
    let limit_plan = limit_plan.into_plan();
    let limit_gap = mart_mono_gap(&limit_plan, cost)?;
    let mut records = Vec::with_capacity(schedule.steps.len());
    for (k, &step) in schedule.steps.iter().enumerate() {
        let (mu_k, nu_k, cost_k) = perturbed_instance(mu, nu, cost, step)?;
        let (plan_k, value) = solve_mot(&mu_k, &nu_k, &cost_k)?;
        let gap = mart_mono_gap(plan_k.plan(), &cost_k)?;
        records.push(StepRecord {
            k: k + 1,
            w1_mu: wasserstein(&mu_k, mu, 1.0)?,
            w1_nu: wasserstein(&nu_k, nu, 1.0)?,
            value,
            value_gap: (value - limit_value).abs(),
            plan_dist: None,
            mono_gap: Some(gap),
        });
    }
    let passed = limit_gap <= tolerance
        && records
            .iter()
            .all(|r| r.mono_gap.unwrap_or(0.0) <= tolerance);
    Ok(StabilityRun {
        mode: StabilityMode::Monotonicity,
        records,
        limit_value,
        limit_plan,
        limit_mono_gap: Some(limit_gap),
        tolerance,
        passed,
    })
}

fn mart_mono_gap(plan: &TransportPlan, cost: &PointwiseCost) -> Result<f64> {
    let cand = CandidateSet::from_plan(plan)?;
    let report = check_subsets(
        &cand,
        &CostSpec::Pointwise(cost.clone()),
        true,
        3,
        tol::GAP,
    )?;
    Ok(report.gap)
}

/// Nested (adapted) distance between two plans: optimal transport between the
/// first marginals with ground cost `|x - x'| + W_r(pi_x, pi'_x')`.
pub fn adapted_distance(a: &TransportPlan, b: &TransportPlan, r: f64) -> Result<f64> {
    for plan in [a, b] {
        let mass = plan.total_mass();
        if (mass - 1.0).abs() > tol::PROBABILITY_MASS {
            return Err(Error::NotProbability { mass });
        }
    }
    let rows_a = plan_rows(a);
    let rows_b = plan_rows(b);
    let (na, nb) = (rows_a.len(), rows_b.len());
    let mut objective = Vec::with_capacity(na * nb);
    for (xa, _, ra) in &rows_a {
        for (xb, _, rb) in &rows_b {
            objective.push((xa - xb).abs() + wasserstein(ra, rb, r)?);
        }
    }
    let mut constraints = Vec::new();
    let mut rhs = Vec::new();
    for (s, row) in rows_a.iter().enumerate() {
        let mut c = vec![0.0; na * nb];
        for t in 0..nb {
            c[s * nb + t] = 1.0;
        }
        constraints.push(c);
        rhs.push(row.1);
    }
    for (t, row) in rows_b.iter().enumerate() {
        let mut c = vec![0.0; na * nb];
        for s in 0..na {
            c[s * nb + t] = 1.0;
        }
        constraints.push(c);
        rhs.push(row.1);
    }
    let sol = crate::lp::solve_lp(&crate::lp::LinearProgram {
        objective,
        constraints,
        rhs,
    })?;
    match sol.status {
        crate::lp::LpStatus::Optimal => Ok(sol.value),
        other => Err(Error::NumericalFailure(format!(
            "adapted distance LP returned {other:?}"
        ))),
    }
}

fn plan_rows(plan: &TransportPlan) -> Vec<(f64, f64, DiscreteMeasure)> {
    (0..plan.x_atoms().len())
        .filter_map(|i| {
            let row = plan.disintegration(i)?;
            Some((plan.x_atoms()[i], plan.row_mass(i), row))
        })
        .collect()
}

/// CSV rendering with the stable column order
/// `k,w1_mu,w1_nu,value,value_gap,plan_dist,mono_gap`.
pub fn format_run_csv(run: &StabilityRun) -> String {
    let mut out = String::from("k,w1_mu,w1_nu,value,value_gap,plan_dist,mono_gap\n");
    for r in &run.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k,
            r.w1_mu,
            r.w1_nu,
            r.value,
            r.value_gap,
            r.plan_dist.map(|v| v.to_string()).unwrap_or_default(),
            r.mono_gap.map(|v| v.to_string()).unwrap_or_default(),
        ));
    }
    out
}

/// Structured text rendering of a run.
pub fn format_run_text(run: &StabilityRun) -> String {
    let mode = match run.mode {
        StabilityMode::Value => "value",
        StabilityMode::Plan => "plan",
        StabilityMode::Monotonicity => "monotone",
    };
    let mut out = String::new();
    out.push_str(&format!("mode: {mode}\n"));
    out.push_str(&format!("limit value: {}\n", run.limit_value));
    if let Some(g) = run.limit_mono_gap {
        out.push_str(&format!("limit monotonicity gap: {g}\n"));
    }
    out.push_str(&format!("tolerance: {}\n", run.tolerance));
    out.push_str(&format!(
        "status: {}\n",
        if run.passed { "pass" } else { "fail" }
    ));
    out.push_str(&format_run_csv(run));
    out
}

/// Classical (non-martingale) value-stability run for weak/linear costs;
/// useful as a cross-check of the general machinery. Binning is skipped for
/// `mu` when the pair must stay feasible only as plain marginals.
pub fn run_value_stability_ot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &PointwiseCost,
    schedule: &PerturbationSchedule,
    tolerance: f64,
) -> Result<StabilityRun> {
    let (limit_plan, limit_value) = solve_ot(mu, nu, cost)?;
    let mut records = Vec::with_capacity(schedule.steps.len());
    for (k, &step) in schedule.steps.iter().enumerate() {
        let mu_k = if step.mu_mesh > 0.0 {
            bin(mu, step.mu_mesh)?
        } else {
            mu.clone()
        };
        let nu_k = if step.nu_dilation > 0.0 {
            dilate(nu, step.nu_dilation)?
        } else {
            nu.clone()
        };
        let cost_k = if step.cost_bump != 0.0 {
            cost.bumped(step.cost_bump, Arc::new(|_, _| 1.0))
        } else {
            cost.clone()
        };
        let (_, value) = solve_ot(&mu_k, &nu_k, &cost_k)?;
        records.push(StepRecord {
            k: k + 1,
            w1_mu: wasserstein(&mu_k, mu, 1.0)?,
            w1_nu: wasserstein(&nu_k, nu, 1.0)?,
            value,
            value_gap: (value - limit_value).abs(),
            plan_dist: None,
            mono_gap: None,
        });
    }
    let passed = records
        .last()
        .map_or(true, |r| r.value_gap <= tolerance);
    Ok(StabilityRun {
        mode: StabilityMode::Value,
        records,
        limit_value,
        limit_plan,
        limit_mono_gap: None,
        tolerance,
        passed,
    })
}
