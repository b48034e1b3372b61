//! Monotonicity checkers.
//!
//! A family `(x_i, p_i)` is monotone for a weak cost `C` when no competitor
//! family `(q_i)` with the same pooled measure `sum q_i = sum p_i` (and, in
//! the martingale variant, the same barycenters `mean q_i = x_i`) achieves a
//! strictly smaller total cost `sum C(x_i, q_i)`.
//!
//! For costs that are linear or barycentric in the conditional law the
//! competitor problem is an exact LP and the verdict is a certificate. For
//! generic oracles only a sound-but-incomplete search is possible: a reported
//! violation is re-verified and therefore true, but a pass proves nothing.

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{CostSpec, GenericCost};
use crate::error::{Error, Result};
use crate::lp::{enumerate_vertices, solve_lp, LinearProgram, LpStatus};
use crate::measure::{pooled, DiscreteMeasure};
use crate::plan::TransportPlan;
use crate::tol;

/// A finite family of `(x_i, p_i)` pairs with its pooled measure.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pairs: Vec<(f64, DiscreteMeasure)>,
    pooled: DiscreteMeasure,
}

impl CandidateSet {
    pub fn new(pairs: Vec<(f64, DiscreteMeasure)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidInput("empty candidate set".into()));
        }
        for (x, p) in &pairs {
            if !x.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite x atom {x}")));
            }
            p.ensure_probability()?;
        }
        let pooled = pooled(&pairs.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>());
        let n = pairs.len() as f64;
        if (pooled.total_mass() - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::NotProbability {
                mass: pooled.total_mass() / n,
            });
        }
        Ok(Self { pairs, pooled })
    }

    /// The disintegration pairs of a plan's positive-mass rows.
    pub fn from_plan(plan: &TransportPlan) -> Result<Self> {
        Self::new(plan.disintegration_pairs())
    }

    pub fn pairs(&self) -> &[(f64, DiscreteMeasure)] {
        &self.pairs
    }

    pub fn pooled(&self) -> &DiscreteMeasure {
        &self.pooled
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The sub-family at the given indices.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.pairs[i].clone()).collect())
    }

    /// Checks `mean(p_i) = x_i` on every pair.
    pub fn validate_martingale(&self, tol: f64) -> Result<()> {
        for (x, p) in &self.pairs {
            let m = p.mean()?;
            if (m - x).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "pair at x = {x} has barycenter {m}; not a martingale candidate"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMethod {
    /// Certified by an exact competitor LP.
    ExactLp,
    /// Sound-but-incomplete search over the competitor polytope.
    GridSearch,
    /// Exhaustive cycle enumeration on a plan's support.
    CycleEnum,
}

impl CheckMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExactLp => "exact-lp",
            Self::GridSearch => "grid-search",
            Self::CycleEnum => "cycle-enum",
        }
    }
}

/// Outcome of a monotonicity check.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub is_violated: bool,
    /// Current cost minus the best competitor cost, clamped at zero.
    pub gap: f64,
    /// The improving competitor family, populated when violated.
    pub competitors: Vec<DiscreteMeasure>,
    pub method: CheckMethod,
}

impl MonotonicityReport {
    fn pass(method: CheckMethod) -> Self {
        Self {
            is_violated: false,
            gap: 0.0,
            competitors: Vec::new(),
            method,
        }
    }
}

/// Checks C-monotonicity of a candidate family via the exact competitor LP.
///
/// Supports costs linear in the conditional law (pointwise `c`) and
/// barycentric costs; generic oracles must go through
/// [`hunt_violation_generic`].
pub fn check_c_monotone(
    cand: &CandidateSet,
    cost: &CostSpec,
    gap_tol: f64,
) -> Result<MonotonicityReport> {
    check_impl(cand, cost, false, gap_tol)
}

/// Checks martingale C-monotonicity: competitors must additionally preserve
/// each barycenter, `mean(q_i) = x_i`.
pub fn check_mart_c_monotone(
    cand: &CandidateSet,
    cost: &CostSpec,
    gap_tol: f64,
) -> Result<MonotonicityReport> {
    cand.validate_martingale(tol::FEASIBILITY)?;
    check_impl(cand, cost, true, gap_tol)
}

fn check_impl(
    cand: &CandidateSet,
    cost: &CostSpec,
    martingale: bool,
    gap_tol: f64,
) -> Result<MonotonicityReport> {
    if martingale {
        hull_check(cand)?;
    }
    let current = current_cost(cand, cost)?;
    let lp = competitor_lp(cand, cost, martingale)?;
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible if martingale => {
            let (lo, hi) = cand.pooled().support_hull().expect("nonempty pooled");
            return Err(Error::InfeasibleBarycenters {
                x: cand.pairs()[0].0,
                lo,
                hi,
            });
        }
        other => {
            return Err(Error::NumericalFailure(format!(
                "competitor LP returned {other:?}"
            )))
        }
    }
    let best = match cost {
        CostSpec::Barycentric(theta) => {
            let (lo, hi) = cand.pooled().support_hull().expect("nonempty pooled");
            sol.value + cand.len() as f64 * theta.min_on(lo, hi)
        }
        _ => sol.value,
    };
    let gap = (current - best).max(0.0);
    let is_violated = gap > gap_tol;
    let competitors = if is_violated {
        extract_competitors(cand, &sol.primal)?
    } else {
        Vec::new()
    };
    Ok(MonotonicityReport {
        is_violated,
        gap,
        competitors,
        method: CheckMethod::ExactLp,
    })
}

fn hull_check(cand: &CandidateSet) -> Result<()> {
    let (lo, hi) = cand.pooled().support_hull().expect("nonempty pooled");
    for &(x, _) in cand.pairs() {
        if x < lo - 1e-9 || x > hi + 1e-9 {
            return Err(Error::InfeasibleBarycenters { x, lo, hi });
        }
    }
    Ok(())
}

/// Total cost of the family itself.
fn current_cost(cand: &CandidateSet, cost: &CostSpec) -> Result<f64> {
    let mut acc = 0.0;
    for (x, p) in cand.pairs() {
        acc += match cost {
            CostSpec::Pointwise(c) => c.integrate(*x, p)?,
            CostSpec::Barycentric(theta) => theta.eval(p.mean()?),
            CostSpec::Generic(c) => c.eval(*x, p),
        };
    }
    Ok(acc)
}

// Shared constraint block: pooled equality per atom, then one probability row
// per pair, then (optionally) one barycenter row per pair. Variables are
// q_{ij} with i indexing pairs and j indexing pooled atoms.
fn competitor_constraints(
    cand: &CandidateSet,
    martingale: bool,
    extra_vars: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let support = cand.pooled().atoms();
    let d = support.len();
    let n_pairs = cand.len();
    let nq = n_pairs * d;
    let width = nq + extra_vars;

    let mut constraints = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..d {
        let mut row = vec![0.0; width];
        for i in 0..n_pairs {
            row[i * d + j] = 1.0;
        }
        constraints.push(row);
        rhs.push(cand.pooled().weights()[j]);
    }
    for i in 0..n_pairs {
        let mut row = vec![0.0; width];
        for j in 0..d {
            row[i * d + j] = 1.0;
        }
        constraints.push(row);
        rhs.push(1.0);
    }
    if martingale {
        for (i, &(x, _)) in cand.pairs().iter().enumerate() {
            let mut row = vec![0.0; width];
            for j in 0..d {
                row[i * d + j] = support[j] - x;
            }
            constraints.push(row);
            rhs.push(0.0);
        }
    }
    (constraints, rhs)
}

fn competitor_lp(cand: &CandidateSet, cost: &CostSpec, martingale: bool) -> Result<LinearProgram> {
    let support = cand.pooled().atoms().to_vec();
    let d = support.len();
    let n_pairs = cand.len();
    let nq = n_pairs * d;
    match cost {
        CostSpec::Pointwise(c) => {
            let (constraints, rhs) = competitor_constraints(cand, martingale, 0);
            let mut objective = Vec::with_capacity(nq);
            for &(x, _) in cand.pairs() {
                for &y in &support {
                    objective.push(c.eval(x, y)?);
                }
            }
            Ok(LinearProgram {
                objective,
                constraints,
                rhs,
            })
        }
        CostSpec::Barycentric(theta) => {
            // epigraph: q | t' (n_pairs) | slacks (n_pairs * pieces)
            let np = theta.pieces.len();
            let extra = n_pairs + n_pairs * np;
            let (mut constraints, mut rhs) = competitor_constraints(cand, martingale, extra);
            let width = nq + extra;
            let (lo, hi) = cand.pooled().support_hull().expect("nonempty pooled");
            let shift = theta.min_on(lo, hi);
            for i in 0..n_pairs {
                for (p, &(a, b)) in theta.pieces.iter().enumerate() {
                    let mut row = vec![0.0; width];
                    row[nq + i] = 1.0;
                    for j in 0..d {
                        row[i * d + j] = -a * support[j];
                    }
                    row[nq + n_pairs + i * np + p] = -1.0;
                    constraints.push(row);
                    rhs.push(b - shift);
                }
            }
            let mut objective = vec![0.0; width];
            for i in 0..n_pairs {
                objective[nq + i] = 1.0;
            }
            Ok(LinearProgram {
                objective,
                constraints,
                rhs,
            })
        }
        CostSpec::Generic(c) => Err(Error::InvalidInput(format!(
            "generic cost `{}` cannot be certified by LP; use hunt_violation_generic",
            c.name
        ))),
    }
}

fn extract_competitors(cand: &CandidateSet, primal: &[f64]) -> Result<Vec<DiscreteMeasure>> {
    let support = cand.pooled().atoms();
    let d = support.len();
    (0..cand.len())
        .map(|i| {
            DiscreteMeasure::new(
                support.to_vec(),
                primal[i * d..(i + 1) * d]
                    .iter()
                    .map(|v| v.max(0.0))
                    .collect(),
            )
        })
        .collect()
}

/// Max-gap check over every sub-family of size at most `max_size`.
///
/// Returns the worst subset's report; a pass certifies all tested subsets.
pub fn check_subsets(
    cand: &CandidateSet,
    cost: &CostSpec,
    martingale: bool,
    max_size: usize,
    gap_tol: f64,
) -> Result<MonotonicityReport> {
    let n = cand.len();
    let mut worst = MonotonicityReport::pass(CheckMethod::ExactLp);
    for size in 1..=max_size.min(n) {
        for combo in (0..n).combinations(size) {
            let sub = cand.subset(&combo)?;
            let report = if martingale {
                check_mart_c_monotone(&sub, cost, gap_tol)?
            } else {
                check_c_monotone(&sub, cost, gap_tol)?
            };
            if report.gap > worst.gap || (report.is_violated && !worst.is_violated) {
                worst = report;
            }
        }
    }
    Ok(worst)
}

/// Searches the competitor polytope of a candidate family for violations of a
/// generic (black-box) cost oracle.
///
/// The search combines polytope vertices (exhaustively enumerated when small,
/// otherwise hit with seeded random objectives), a deterministic dyadic grid
/// between the current family and each vertex, and seeded random interior
/// points. Soundness contract: a reported violation has been re-verified
/// against the constraints and is a true violation; a pass is *not* a
/// certificate.
pub fn hunt_violation_generic(
    cand: &CandidateSet,
    oracle: &GenericCost,
    budget: usize,
    martingale: bool,
    seed: u64,
    gap_tol: f64,
) -> Result<MonotonicityReport> {
    let d = cand.pooled().support_size();
    if d > 12 {
        return Err(Error::TooLarge(format!(
            "pooled support {d} exceeds the parametrization guard of 12"
        )));
    }
    if martingale {
        cand.validate_martingale(tol::FEASIBILITY)?;
        hull_check(cand)?;
    }
    let n_pairs = cand.len();
    let current: f64 = cand
        .pairs()
        .iter()
        .map(|(x, p)| oracle.eval(*x, p))
        .sum();
    if n_pairs == 1 {
        // the pooled constraint forces q_1 = p_1
        return Ok(MonotonicityReport::pass(CheckMethod::GridSearch));
    }

    let (constraints, rhs) = competitor_constraints(cand, martingale, 0);
    let nq = n_pairs * d;
    let feasibility = LinearProgram {
        objective: vec![0.0; nq],
        constraints,
        rhs,
    };

    // current family as a flat feasible point
    let support = cand.pooled().atoms().to_vec();
    let mut current_flat = vec![0.0; nq];
    for (i, (_, p)) in cand.pairs().iter().enumerate() {
        for (j, &y) in support.iter().enumerate() {
            current_flat[i * d + j] = p.mass_at(y, 1e-9);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let vertices = match enumerate_vertices(&feasibility) {
        Ok(v) => v.into_iter().map(|s| s.primal).collect::<Vec<_>>(),
        Err(Error::TooLarge(_)) => {
            // sample vertices through random objectives instead
            let mut sampled = Vec::new();
            for _ in 0..(budget / 4).clamp(8, 64) {
                let lp = LinearProgram {
                    objective: (0..nq).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    constraints: feasibility.constraints.clone(),
                    rhs: feasibility.rhs.clone(),
                };
                if let Ok(sol) = solve_lp(&lp) {
                    if sol.status == LpStatus::Optimal {
                        sampled.push(sol.primal);
                    }
                }
            }
            sampled
        }
        Err(e) => return Err(e),
    };
    candidates.extend(vertices.iter().cloned());

    // dyadic refinement towards each vertex, then random interior points
    for v in &vertices {
        for level in [0.25, 0.5, 0.75] {
            candidates.push(blend(&current_flat, v, level));
        }
        if candidates.len() >= budget {
            break;
        }
    }
    while candidates.len() < budget && !vertices.is_empty() {
        let k = rng.gen_range(1..=vertices.len().min(4));
        let mut point = vec![0.0; nq];
        let mut total = 0.0;
        for _ in 0..k {
            let w: f64 = -f64::ln(rng.gen_range(1e-12..1.0));
            let v = &vertices[rng.gen_range(0..vertices.len())];
            for (acc, x) in point.iter_mut().zip(v) {
                *acc += w * x;
            }
            total += w;
        }
        let w: f64 = -f64::ln(rng.gen_range(1e-12..1.0));
        for (acc, x) in point.iter_mut().zip(&current_flat) {
            *acc = (*acc + w * x) / (total + w);
        }
        candidates.push(point);
    }
    candidates.truncate(budget.max(1));

    let mut best_cost = current;
    let mut best_family: Option<Vec<DiscreteMeasure>> = None;
    for flat in &candidates {
        if crate::lp::residual(&feasibility, flat) > tol::FEASIBILITY {
            continue;
        }
        let family: Result<Vec<DiscreteMeasure>> = (0..n_pairs)
            .map(|i| DiscreteMeasure::new(support.clone(), flat[i * d..(i + 1) * d].to_vec()))
            .collect();
        let Ok(family) = family else { continue };
        let cost: f64 = cand
            .pairs()
            .iter()
            .zip(&family)
            .map(|((x, _), q)| oracle.eval(*x, q))
            .sum();
        if cost < best_cost {
            best_cost = cost;
            best_family = Some(family);
        }
    }

    let gap = (current - best_cost).max(0.0);
    let is_violated = gap > gap_tol;
    Ok(MonotonicityReport {
        is_violated,
        gap,
        competitors: if is_violated {
            best_family.unwrap_or_default()
        } else {
            Vec::new()
        },
        method: CheckMethod::GridSearch,
    })
}

fn blend(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (1.0 - lambda) * x + lambda * y)
        .collect()
}

/// Renders a report in the structured text format: verdict, gap, method,
/// then each competitor in the standard measure format.
pub fn format_report(report: &MonotonicityReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "verdict: {}\n",
        if report.is_violated { "violated" } else { "ok" }
    ));
    out.push_str(&format!("gap: {}\n", report.gap));
    out.push_str(&format!("method: {}\n", report.method.as_str()));
    for (i, q) in report.competitors.iter().enumerate() {
        out.push_str(&format!("competitor {}:\n", i + 1));
        out.push_str(&crate::measure::format_measure(q));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::PointwiseCost;
    use crate::mot::solve_mot;
    use crate::transport::solve_ot;

    fn half(a: f64, b: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(vec![a, b], vec![0.5, 0.5]).unwrap()
    }

    fn abs_cost() -> CostSpec {
        CostSpec::Pointwise(PointwiseCost::Abs)
    }

    #[test]
    fn single_pair_is_never_violated() {
        let cand = CandidateSet::new(vec![(0.5, half(-1.0, 1.0))]).unwrap();
        let report = check_c_monotone(&cand, &abs_cost(), tol::GAP).unwrap();
        assert!(!report.is_violated);
        assert!(report.gap <= 1e-10);
    }

    #[test]
    fn equal_x_linear_cost_is_reallocation_invariant() {
        let cand = CandidateSet::new(vec![
            (0.0, half(-1.0, 1.0)),
            (0.0, half(-2.0, 2.0)),
        ])
        .unwrap();
        let report = check_c_monotone(&cand, &abs_cost(), tol::GAP).unwrap();
        assert!(!report.is_violated);
        assert!(report.gap <= 1e-9);
    }

    #[test]
    fn anti_monotone_disintegration_is_violated_for_square_cost() {
        // the anti-monotone vertex of the transport instance from the solver
        // tests: {0 -> 3, 1 -> 2} under (x - y)^2
        let plan = TransportPlan::new(
            vec![0.0, 1.0],
            vec![2.0, 3.0],
            vec![vec![0.0, 0.5], vec![0.5, 0.0]],
        )
        .unwrap();
        let cand = CandidateSet::from_plan(&plan).unwrap();
        let report = check_c_monotone(
            &cand,
            &CostSpec::Pointwise(PointwiseCost::Square),
            tol::GAP,
        )
        .unwrap();
        assert!(report.is_violated);
        assert!(report.gap > 0.5);
        assert_eq!(report.competitors.len(), 2);
    }

    #[test]
    fn martingale_check_with_forced_competitors_passes() {
        // barycenter constraints admit exactly one feasible family
        let p1 = DiscreteMeasure::new(vec![-2.0, 2.0], vec![0.75, 0.25]).unwrap();
        let p2 = DiscreteMeasure::new(vec![-2.0, 2.0], vec![0.25, 0.75]).unwrap();
        let cand = CandidateSet::new(vec![(-1.0, p1), (1.0, p2)]).unwrap();
        let report = check_mart_c_monotone(&cand, &abs_cost(), tol::GAP).unwrap();
        assert!(!report.is_violated);
        assert!(report.gap <= 1e-9);
    }

    #[test]
    fn martingale_violation_with_hand_computed_competitor() {
        // current total is 4; the competitor pair achieves 3
        let p1 = half(-3.0, 1.0);
        let p2 = half(-1.0, 3.0);
        let cand = CandidateSet::new(vec![(-1.0, p1), (1.0, p2)]).unwrap();
        let report = check_mart_c_monotone(&cand, &abs_cost(), tol::GAP).unwrap();
        assert!(report.is_violated);
        assert!(report.gap >= 1.0 - 1e-9);
        // competitors keep their barycenters
        for ((x, _), q) in cand.pairs().iter().zip(&report.competitors) {
            assert!((q.mean().unwrap() - x).abs() < 1e-7);
        }
    }

    #[test]
    fn mot_optimizer_disintegrations_pass_martingale_check() {
        let mut rng = crate::testutil::rng(51);
        for _ in 0..20 {
            let (mu, nu) = crate::testutil::random_convex_order_pair(&mut rng, 3, 5);
            let (plan, _) = solve_mot(&mu, &nu, &PointwiseCost::Abs).unwrap();
            let cand = CandidateSet::from_plan(plan.plan()).unwrap();
            let report = check_subsets(&cand, &abs_cost(), true, 3, tol::GAP).unwrap();
            assert!(!report.is_violated, "gap {}", report.gap);
        }
    }

    #[test]
    fn restriction_property_passes_on_subsets() {
        let mut rng = crate::testutil::rng(52);
        for _ in 0..10 {
            let mu = crate::testutil::random_probability(&mut rng, 3);
            let nu = crate::testutil::random_probability(&mut rng, 4);
            let (plan, _) = solve_ot(&mu, &nu, &PointwiseCost::Square).unwrap();
            let cand = CandidateSet::from_plan(&plan).unwrap();
            let full = check_c_monotone(
                &cand,
                &CostSpec::Pointwise(PointwiseCost::Square),
                tol::GAP,
            )
            .unwrap();
            assert!(!full.is_violated);
            // pass implies sub-pass
            let report = check_subsets(
                &cand,
                &CostSpec::Pointwise(PointwiseCost::Square),
                false,
                cand.len(),
                tol::GAP,
            )
            .unwrap();
            assert!(!report.is_violated);
        }
    }

    #[test]
    fn duplicating_pairs_preserves_passes_for_convex_costs() {
        let mut rng = crate::testutil::rng(53);
        for _ in 0..10 {
            let (mu, nu) = crate::testutil::random_convex_order_pair(&mut rng, 3, 4);
            let (plan, _) = solve_mot(&mu, &nu, &PointwiseCost::Abs).unwrap();
            let mut pairs = plan.plan().disintegration_pairs();
            pairs.push(pairs[0].clone());
            let cand = CandidateSet::new(pairs).unwrap();
            let report = check_mart_c_monotone(&cand, &abs_cost(), tol::GAP).unwrap();
            assert!(!report.is_violated, "gap {}", report.gap);
        }
    }

    #[test]
    fn hunter_reproduces_the_concave_counterexample() {
        // pairs [(0, nu), (0, nu)] with C = min(p({0}), p({1})):
        // 2 C(0, nu) = 1 while the split (delta_0, delta_1) costs 0
        let nu = half(0.0, 1.0);
        let cand = CandidateSet::new(vec![(0.0, nu.clone()), (0.0, nu)]).unwrap();
        let report =
            hunt_violation_generic(&cand, &GenericCost::min01(), 200, false, 0, tol::GAP).unwrap();
        assert!(report.is_violated);
        assert!((report.gap - 1.0).abs() < 1e-9);
        let mut found_d0 = false;
        let mut found_d1 = false;
        for q in &report.competitors {
            if q.approx_eq(&DiscreteMeasure::dirac(0.0), 1e-9) {
                found_d0 = true;
            }
            if q.approx_eq(&DiscreteMeasure::dirac(1.0), 1e-9) {
                found_d1 = true;
            }
        }
        assert!(found_d0 && found_d1, "competitors {:?}", report.competitors);
    }

    #[test]
    fn hunter_finds_nothing_on_linear_cost_optimizers() {
        // cross-check the hunter against the exact-LP verdict
        let mut rng = crate::testutil::rng(54);
        for seed in 0..5u64 {
            let mu = crate::testutil::random_probability(&mut rng, 2);
            let nu = crate::testutil::random_probability(&mut rng, 3);
            let (plan, _) = solve_ot(&mu, &nu, &PointwiseCost::Abs).unwrap();
            let cand = CandidateSet::from_plan(&plan).unwrap();
            let oracle = GenericCost::new(
                "linear-abs",
                std::sync::Arc::new(|x: f64, p: &DiscreteMeasure| {
                    PointwiseCost::Abs.integrate(x, p).unwrap()
                }),
            );
            let report =
                hunt_violation_generic(&cand, &oracle, 300, false, seed, tol::GAP).unwrap();
            assert!(!report.is_violated, "gap {}", report.gap);
            let exact = check_c_monotone(&cand, &abs_cost(), tol::GAP).unwrap();
            assert!(!exact.is_violated);
        }
    }

    #[test]
    fn hunter_guards_large_pooled_supports() {
        let atoms: Vec<f64> = (0..13).map(|i| i as f64).collect();
        let wide = DiscreteMeasure::uniform(atoms).unwrap();
        let x = wide.mean().unwrap();
        let cand = CandidateSet::new(vec![(x, wide.clone()), (x, wide)]).unwrap();
        assert!(matches!(
            hunt_violation_generic(&cand, &GenericCost::min01(), 50, false, 0, tol::GAP),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn hunter_single_pair_short_circuits() {
        let cand = CandidateSet::new(vec![(0.0, half(0.0, 1.0))]).unwrap();
        let report =
            hunt_violation_generic(&cand, &GenericCost::min01(), 50, false, 0, tol::GAP).unwrap();
        assert!(!report.is_violated);
    }

    #[test]
    fn report_format_contains_fields() {
        let cand = CandidateSet::new(vec![(0.0, half(0.0, 1.0)), (0.0, half(0.0, 1.0))]).unwrap();
        let report =
            hunt_violation_generic(&cand, &GenericCost::min01(), 200, false, 0, tol::GAP).unwrap();
        let text = format_report(&report);
        assert!(text.contains("verdict: violated"));
        assert!(text.contains("gap: 1"));
        assert!(text.contains("method: grid-search"));
        assert!(text.contains("competitor 1:"));
    }
}
