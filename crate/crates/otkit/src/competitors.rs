//! Constructive competitor machinery.
//!
//! Given families `p = (p_i)` and `q = (q_i)` with equal pooled measures, and
//! a perturbed family `p'`, [`build_competitors`] produces `q'` with
//! `sum q'_i = sum p'_i` by decomposing `q` into sub-measures against `p` and
//! pushing each piece through the quantile coupling of `p_i` and `p'_i`. The
//! construction contracts distances: the pieces of row `i` move by no more
//! than `p_i` itself does.
//!
//! [`repair_barycenters`] restores per-index barycenter equalities afterwards
//! by exchanging extreme atom mass inside admissible pairs (support hulls
//! overlapping with positive length, or strictly nested), which is what the
//! martingale competitor construction [`build_mart_competitors`] needs.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::measure::{pooled, DiscreteMeasure};
use crate::plan::quantile_coupling;

/// An `N x N` matrix of sub-measures with row sums `p_i` and column sums
/// `q_j`; each entry is dominated by both its row and column measure.
#[derive(Debug, Clone)]
pub struct Decomposition {
    entries: Vec<Vec<DiscreteMeasure>>,
}

impl Decomposition {
    pub fn entry(&self, i: usize, j: usize) -> &DiscreteMeasure {
        &self.entries[i][j]
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn row_sum(&self, i: usize) -> DiscreteMeasure {
        pooled(&self.entries[i])
    }

    pub fn column_sum(&self, j: usize) -> DiscreteMeasure {
        pooled(
            &self
                .entries
                .iter()
                .map(|row| row[j].clone())
                .collect::<Vec<_>>(),
        )
    }
}

/// One exchange step of the barycenter repair.
#[derive(Debug, Clone)]
pub struct RepairStep {
    /// Index donating mass at the high atoms.
    pub donor: usize,
    /// Index donating mass at the low atoms (and receiving the high mass).
    pub receiver: usize,
    /// High atom set taken from the donor.
    pub high_atoms: Vec<f64>,
    /// Low atom set taken from the receiver.
    pub low_atoms: Vec<f64>,
    /// Transferred mass.
    pub amount: f64,
}

/// Log of a barycenter repair run.
#[derive(Debug, Clone, Default)]
pub struct RepairTrace {
    pub steps: Vec<RepairStep>,
    /// Final barycenter errors per index.
    pub residuals: Vec<f64>,
}

/// Largest atom-wise mass deviation between two measures.
pub fn pooled_deviation(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    let mut atoms: Vec<f64> = a.atoms().iter().chain(b.atoms()).copied().collect();
    atoms.sort_by(f64::total_cmp);
    atoms.dedup_by(|x, y| (*x - *y).abs() <= 1e-9);
    atoms
        .into_iter()
        .map(|x| (a.mass_at(x, 1e-9) - b.mass_at(x, 1e-9)).abs())
        .fold(0.0, f64::max)
}

/// Decomposes two families with equal pooled measure into sub-measures
/// `m_{ij}` with `sum_j m_{ij} = p_i` and `sum_i m_{ij} = q_j`.
///
/// The constraints decouple per atom of the pooled support, so the feasibility
/// LP is solved atom by atom; the objective `sum (i - j)^2 m_{ij}` keeps the
/// result diagonal whenever possible and Bland pivoting makes it
/// deterministic.
pub fn decompose(p: &[DiscreteMeasure], q: &[DiscreteMeasure]) -> Result<Decomposition> {
    let n = p.len();
    if n == 0 || q.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} row measures vs {} column measures",
            n,
            q.len()
        )));
    }
    let pooled_p = pooled(p);
    let pooled_q = pooled(q);
    let deviation = pooled_deviation(&pooled_p, &pooled_q);
    if deviation > 1e-9 {
        return Err(Error::InfeasiblePooled { deviation });
    }

    let mut entries: Vec<Vec<Vec<(f64, f64)>>> = vec![vec![Vec::new(); n]; n];
    for &atom in pooled_p.atoms() {
        let rows: Vec<f64> = p.iter().map(|m| m.mass_at(atom, 1e-9)).collect();
        let cols: Vec<f64> = q.iter().map(|m| m.mass_at(atom, 1e-9)).collect();
        let cell = atom_transport(&rows, &cols)?;
        for i in 0..n {
            for j in 0..n {
                if cell[i * n + j] > 0.0 {
                    entries[i][j].push((atom, cell[i * n + j]));
                }
            }
        }
    }
    let entries: Result<Vec<Vec<DiscreteMeasure>>> = entries
        .into_iter()
        .map(|row| row.into_iter().map(DiscreteMeasure::from_pairs).collect())
        .collect();
    Ok(Decomposition { entries: entries? })
}

// Transportation feasibility on one atom: row sums `rows`, column sums
// `cols`, diagonal-preferring objective.
fn atom_transport(rows: &[f64], cols: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    let mut objective = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let d = i as f64 - j as f64;
            objective.push(d * d);
        }
    }
    let mut constraints = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        let mut row = vec![0.0; n * n];
        for j in 0..n {
            row[i * n + j] = 1.0;
        }
        constraints.push(row);
        rhs.push(rows[i]);
    }
    for j in 0..n {
        let mut row = vec![0.0; n * n];
        for i in 0..n {
            row[i * n + j] = 1.0;
        }
        constraints.push(row);
        rhs.push(cols[j]);
    }
    let sol = solve_lp(&LinearProgram {
        objective,
        constraints,
        rhs,
    })?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.primal.iter().map(|v| v.max(0.0)).collect()),
        other => Err(Error::NumericalFailure(format!(
            "atom transport LP returned {other:?}"
        ))),
    }
}

/// Everything produced by the competitor construction, including the pieces
/// needed to verify the per-row distance contract.
#[derive(Debug, Clone)]
pub struct CompetitorBuild {
    pub competitors: Vec<DiscreteMeasure>,
    pub decomposition: Decomposition,
    /// `pushed[i][j]` is `m_{ij}` transported through the coupling of
    /// `(p_i, p'_i)`.
    pub pushed: Vec<Vec<DiscreteMeasure>>,
}

/// Builds competitors of the perturbed family: `q'` with
/// `sum q'_i = sum p'_i`, converging to `q` as `p'` converges to `p`.
///
/// `r` selects the Wasserstein order of the couplings; on the real line the
/// quantile coupling is optimal for every `r >= 1`, so the construction is
/// identical for all orders (the parameter is validated and recorded only).
pub fn build_competitors(
    p: &[DiscreteMeasure],
    q: &[DiscreteMeasure],
    p_perturbed: &[DiscreteMeasure],
    r: f64,
) -> Result<Vec<DiscreteMeasure>> {
    Ok(build_competitors_full(p, q, p_perturbed, r)?.competitors)
}

pub fn build_competitors_full(
    p: &[DiscreteMeasure],
    q: &[DiscreteMeasure],
    p_perturbed: &[DiscreteMeasure],
    r: f64,
) -> Result<CompetitorBuild> {
    let n = p.len();
    if p_perturbed.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} perturbed measures vs {n} originals",
            p_perturbed.len()
        )));
    }
    if r < 1.0 {
        return Err(Error::InvalidInput(format!("order r = {r} must be >= 1")));
    }
    for m in p.iter().chain(q).chain(p_perturbed) {
        m.ensure_probability()?;
    }
    let decomposition = decompose(p, q)?;

    // quantile couplings chi^i between p_i and p'_i, as per-atom conditionals
    let mut conditionals: Vec<Vec<DiscreteMeasure>> = Vec::with_capacity(n);
    for i in 0..n {
        let chi = quantile_coupling(&p[i], &p_perturbed[i])?;
        let rows: Vec<DiscreteMeasure> = (0..p[i].support_size())
            .map(|a| {
                chi.disintegration(a)
                    .expect("every atom of a probability measure carries mass")
            })
            .collect();
        conditionals.push(rows);
    }

    let mut pushed: Vec<Vec<DiscreteMeasure>> = vec![vec![DiscreteMeasure::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            pushed[i][j] = push_through(decomposition.entry(i, j), &p[i], &conditionals[i])?;
        }
    }

    // q'_i collects column i of the pushed matrix
    let competitors: Vec<DiscreteMeasure> = (0..n)
        .map(|i| pooled(&(0..n).map(|j| pushed[j][i].clone()).collect::<Vec<_>>()))
        .collect();
    Ok(CompetitorBuild {
        competitors,
        decomposition,
        pushed,
    })
}

// Transports a sub-measure of p_i through the conditionals of the coupling.
fn push_through(
    piece: &DiscreteMeasure,
    p_i: &DiscreteMeasure,
    conditionals: &[DiscreteMeasure],
) -> Result<DiscreteMeasure> {
    let mut acc = DiscreteMeasure::zero();
    for (&atom, &mass) in piece.atoms().iter().zip(piece.weights()) {
        let idx = p_i
            .atoms()
            .iter()
            .position(|a| (a - atom).abs() <= 1e-9)
            .ok_or_else(|| {
                Error::NumericalFailure(format!(
                    "decomposition piece has atom {atom} outside the row support"
                ))
            })?;
        acc = acc.add(&conditionals[idx].scaled(mass));
    }
    Ok(acc)
}

/// Restores barycenter targets by exchanging extreme atom mass between
/// admissible indices, preserving the pooled measure and every total mass.
///
/// Indices are processed in the lexicographic order of their support hulls;
/// a pair is admissible when the hulls overlap with positive length or one
/// lies strictly inside the other. Each step transfers
/// `alpha = deficit / (bar(I1) - bar(I2))` capped by the available mass.
/// When mismatches remain and no admissible pair exists the repair fails,
/// which is the expected outcome for large perturbations.
pub fn repair_barycenters(
    q_perturbed: &[DiscreteMeasure],
    p_perturbed: &[DiscreteMeasure],
    tol: f64,
) -> Result<(Vec<DiscreteMeasure>, RepairTrace)> {
    let n = q_perturbed.len();
    if p_perturbed.len() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} measures vs {} targets",
            n,
            p_perturbed.len()
        )));
    }
    let deviation = pooled_deviation(&pooled(q_perturbed), &pooled(p_perturbed));
    if deviation > 1e-9 {
        return Err(Error::InfeasiblePooled { deviation });
    }
    let targets: Vec<f64> = p_perturbed
        .iter()
        .map(|m| m.mean())
        .collect::<Result<_>>()?;
    let mut qs = q_perturbed.to_vec();
    let global_balance: f64 = qs
        .iter()
        .zip(&targets)
        .map(|(q, t)| t - q.mean().unwrap())
        .sum();
    if global_balance.abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "global mean imbalance {global_balance}; pooled equality cannot hold"
        )));
    }

    let mut trace = RepairTrace::default();
    let cap = 10 * n * n;
    for _ in 0..=cap {
        let residuals: Vec<f64> = qs
            .iter()
            .zip(&targets)
            .map(|(q, t)| t - q.mean().unwrap())
            .collect();
        let order = hull_order(&qs);
        let Some(&i) = order.iter().find(|&&i| residuals[i].abs() > tol) else {
            trace.residuals = residuals;
            return Ok((qs, trace));
        };

        let admissible: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&j| j != i && hulls_admissible(&qs[i], &qs[j]))
            .collect();
        let mut partners = admissible.clone();
        // opposite-sign partners cancel mismatch; try the largest first
        partners.sort_by(|&a, &b| {
            let key = |j: usize| {
                let opposite = residuals[j] * residuals[i] < 0.0 && residuals[j].abs() > tol;
                (!opposite, -residuals[j].abs())
            };
            key(a)
                .partial_cmp(&key(b))
                .unwrap()
                .then(order_position(&order, a).cmp(&order_position(&order, b)))
        });

        let mut stepped = false;
        for j in partners {
            if let Some(step) = try_exchange(&mut qs, i, j, residuals[i]) {
                trace.steps.push(step);
                stepped = true;
                break;
            }
        }
        if !stepped {
            return Err(Error::RepairFailed { residuals });
        }
    }
    let residuals: Vec<f64> = qs
        .iter()
        .zip(&targets)
        .map(|(q, t)| t - q.mean().unwrap())
        .collect();
    Err(Error::RepairFailed { residuals })
}

fn order_position(order: &[usize], i: usize) -> usize {
    order.iter().position(|&x| x == i).unwrap()
}

// lexicographic order on (inf hull, sup hull), index as final tiebreak
fn hull_order(qs: &[DiscreteMeasure]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..qs.len()).collect();
    order.sort_by(|&a, &b| {
        let ha = qs[a].support_hull().unwrap_or((f64::MAX, f64::MAX));
        let hb = qs[b].support_hull().unwrap_or((f64::MAX, f64::MAX));
        ha.0.total_cmp(&hb.0)
            .then(ha.1.total_cmp(&hb.1))
            .then(a.cmp(&b))
    });
    order
}

fn hulls_admissible(a: &DiscreteMeasure, b: &DiscreteMeasure) -> bool {
    let (Some((alo, ahi)), Some((blo, bhi))) = (a.support_hull(), b.support_hull()) else {
        return false;
    };
    let overlap = ahi.min(bhi) - alo.max(blo);
    let b_inside_a = blo > alo && bhi < ahi;
    let a_inside_b = alo > blo && ahi < bhi;
    overlap > 0.0 || b_inside_a || a_inside_b
}

// Exchanges extreme atom mass so that mean(qs[i]) moves by `deficit`; the
// partner absorbs the opposite shift. Returns None when the pair cannot move
// the mean in the required direction.
fn try_exchange(
    qs: &mut [DiscreteMeasure],
    i: usize,
    j: usize,
    deficit: f64,
) -> Option<RepairStep> {
    if deficit > 0.0 {
        // i's mean must rise: receive the partner's highest atom, give away
        // our lowest
        let u = *qs[j].atoms().last()?;
        let v = *qs[i].atoms().first()?;
        if u <= v {
            return None;
        }
        let capacity = qs[j].mass_at(u, 0.0).min(qs[i].mass_at(v, 0.0));
        let alpha = (deficit / (u - v)).min(capacity);
        if alpha <= 0.0 {
            return None;
        }
        let new_i = exchange(&qs[i], u, v, alpha);
        let new_j = exchange(&qs[j], v, u, alpha);
        qs[i] = new_i;
        qs[j] = new_j;
        Some(RepairStep {
            donor: j,
            receiver: i,
            high_atoms: vec![u],
            low_atoms: vec![v],
            amount: alpha,
        })
    } else {
        // i's mean must fall: donate our highest atom, receive the partner's
        // lowest
        let u = *qs[i].atoms().last()?;
        let v = *qs[j].atoms().first()?;
        if u <= v {
            return None;
        }
        let capacity = qs[i].mass_at(u, 0.0).min(qs[j].mass_at(v, 0.0));
        let alpha = ((-deficit) / (u - v)).min(capacity);
        if alpha <= 0.0 {
            return None;
        }
        let new_i = exchange(&qs[i], v, u, alpha);
        let new_j = exchange(&qs[j], u, v, alpha);
        qs[i] = new_i;
        qs[j] = new_j;
        Some(RepairStep {
            donor: i,
            receiver: j,
            high_atoms: vec![u],
            low_atoms: vec![v],
            amount: alpha,
        })
    }
}

// m + alpha*delta_add - alpha*delta_sub; `sub` must be an existing atom with
// mass at least alpha.
fn exchange(m: &DiscreteMeasure, add: f64, sub: f64, alpha: f64) -> DiscreteMeasure {
    let mut pairs: Vec<(f64, f64)> = m
        .atoms()
        .iter()
        .copied()
        .zip(m.weights().iter().copied())
        .collect();
    let idx = pairs
        .iter()
        .position(|&(a, _)| a == sub)
        .expect("subtracted atom exists");
    pairs[idx].1 = (pairs[idx].1 - alpha).max(0.0);
    pairs.push((add, alpha));
    DiscreteMeasure::from_pairs(pairs).expect("exchange preserves validity")
}

/// Martingale competitor construction: build, then repair the barycenters to
/// the perturbed targets. Outputs are machine-checked for pooled equality and
/// barycenter equality after every call.
pub fn build_mart_competitors(
    p: &[DiscreteMeasure],
    q: &[DiscreteMeasure],
    p_perturbed: &[DiscreteMeasure],
) -> Result<Vec<DiscreteMeasure>> {
    for (pi, qi) in p.iter().zip(q) {
        let dev = (pi.mean()? - qi.mean()?).abs();
        if dev > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "input families are not martingale competitors: mean deviation {dev}"
            )));
        }
    }
    let built = build_competitors(p, q, p_perturbed, 1.0)?;
    let (repaired, _) = repair_barycenters(&built, p_perturbed, 1e-10)?;

    let pooled_dev = pooled_deviation(&pooled(&repaired), &pooled(p_perturbed));
    if pooled_dev > 1e-9 {
        return Err(Error::NumericalFailure(format!(
            "competitor output violates pooled equality by {pooled_dev}"
        )));
    }
    for (qi, pi) in repaired.iter().zip(p_perturbed) {
        let dev = (qi.mean()? - pi.mean()?).abs();
        if dev > 1e-8 {
            return Err(Error::NumericalFailure(format!(
                "competitor output violates barycenter equality by {dev}"
            )));
        }
    }
    Ok(repaired)
}

/// Renders a repair trace as structured text.
pub fn format_trace(trace: &RepairTrace) -> String {
    let mut out = format!("steps: {}\n", trace.steps.len());
    for (k, s) in trace.steps.iter().enumerate() {
        out.push_str(&format!(
            "step {}: donor={} receiver={} high={:?} low={:?} alpha={}\n",
            k + 1,
            s.donor,
            s.receiver,
            s.high_atoms,
            s.low_atoms,
            s.amount
        ));
    }
    out.push_str(&format!(
        "residuals: {}\n",
        trace
            .residuals
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{dilate, wasserstein, wasserstein_power_raw};
    use rand::Rng;

    fn half(a: f64, b: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(vec![a, b], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn decompose_single_family() {
        let p = vec![half(0.0, 1.0)];
        let d = decompose(&p, &p).unwrap();
        assert!(d.entry(0, 0).approx_eq(&p[0], 1e-12));
    }

    #[test]
    fn decompose_identical_families_is_diagonal() {
        let m = half(-1.0, 2.0);
        let p = vec![m.clone(), m.clone()];
        let d = decompose(&p, &p).unwrap();
        assert!(d.entry(0, 0).approx_eq(&m, 1e-10));
        assert!(d.entry(1, 1).approx_eq(&m, 1e-10));
        assert!(d.entry(0, 1).is_zero());
        assert!(d.entry(1, 0).is_zero());
    }

    #[test]
    fn decompose_unique_two_by_two_system() {
        let p = vec![DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0)];
        let q = vec![half(0.0, 1.0), half(0.0, 1.0)];
        let d = decompose(&p, &q).unwrap();
        let h = |x: f64| DiscreteMeasure::new(vec![x], vec![0.5]).unwrap();
        assert!(d.entry(0, 0).approx_eq(&h(0.0), 1e-10));
        assert!(d.entry(0, 1).approx_eq(&h(0.0), 1e-10));
        assert!(d.entry(1, 0).approx_eq(&h(1.0), 1e-10));
        assert!(d.entry(1, 1).approx_eq(&h(1.0), 1e-10));
    }

    #[test]
    fn decompose_rejects_mismatched_pooled() {
        let p = vec![DiscreteMeasure::dirac(0.0)];
        let q = vec![DiscreteMeasure::dirac(1.0)];
        assert!(matches!(
            decompose(&p, &q),
            Err(Error::InfeasiblePooled { .. })
        ));
    }

    #[test]
    fn decompose_invariants_on_random_families() {
        let mut rng = crate::testutil::rng(61);
        for _ in 0..20 {
            let n = 2 + crate::testutil::pick(&mut rng, 2);
            let p: Vec<DiscreteMeasure> = (0..n)
                .map(|_| crate::testutil::random_probability(&mut rng, 4))
                .collect();
            // q: a pooled-preserving reshuffle obtained by decomposing p
            // against a random permutation of itself
            let mut q = p.clone();
            q.reverse();
            let d = decompose(&p, &q).unwrap();
            for i in 0..n {
                assert!(d.row_sum(i).approx_eq(&p[i], 1e-8));
                assert!(d.column_sum(i).approx_eq(&q[i], 1e-8));
            }
        }
    }

    #[test]
    fn build_identity_perturbation_returns_q() {
        let p = vec![half(-1.0, 1.0), half(-2.0, 2.0)];
        let q = vec![half(-2.0, 1.0), half(-1.0, 2.0)];
        // pooled(p) == pooled(q)
        let out = build_competitors(&p, &q, &p, 1.0).unwrap();
        for (a, b) in out.iter().zip(&q) {
            assert!(a.approx_eq(b, 1e-10), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn build_single_family_is_forced() {
        let p = vec![half(0.0, 1.0)];
        let p_new = vec![half(0.25, 1.25)];
        let out = build_competitors(&p, &p, &p_new, 1.0).unwrap();
        assert!(out[0].approx_eq(&p_new[0], 1e-10));
    }

    #[test]
    fn build_translation_equivariance() {
        let p = vec![half(-1.0, 1.0), half(-2.0, 2.0)];
        let q = vec![half(-2.0, 1.0), half(-1.0, 2.0)];
        let t = 0.375;
        let p_new: Vec<_> = p.iter().map(|m| m.translated(t)).collect();
        let out = build_competitors(&p, &q, &p_new, 1.0).unwrap();
        for (a, b) in out.iter().zip(&q) {
            assert!(a.approx_eq(&b.translated(t), 1e-10));
        }
    }

    #[test]
    fn build_satisfies_pooled_equality_and_distance_contract() {
        let mut rng = crate::testutil::rng(62);
        for _ in 0..100 {
            let n = 2 + crate::testutil::pick(&mut rng, 2);
            let p: Vec<DiscreteMeasure> = (0..n)
                .map(|_| crate::testutil::random_probability(&mut rng, 4))
                .collect();
            let mut q = p.clone();
            q.rotate_left(1);
            let p_new: Vec<DiscreteMeasure> = p
                .iter()
                .map(|m| {
                    if rng.gen_bool(0.5) {
                        m.translated(0.25)
                    } else {
                        dilate(m, 0.25).unwrap()
                    }
                })
                .collect();
            let r = [1.0, 2.0][crate::testutil::pick(&mut rng, 2)];
            let full = build_competitors_full(&p, &q, &p_new, r).unwrap();

            let dev = pooled_deviation(&pooled(&full.competitors), &pooled(&p_new));
            assert!(dev <= 1e-10, "pooled deviation {dev}");

            for i in 0..n {
                let mut lhs = 0.0;
                for j in 0..n {
                    lhs += wasserstein_power_raw(&full.pushed[i][j], full.decomposition.entry(i, j), r)
                        .unwrap();
                }
                let rhs = wasserstein(&p_new[i], &p[i], r).unwrap().powf(r);
                assert!(lhs <= rhs + 1e-9, "row {i}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn repair_zero_mismatch_is_identity() {
        let q = vec![half(-1.0, 1.0), half(-2.0, 2.0)];
        let (out, trace) = repair_barycenters(&q, &q, 1e-10).unwrap();
        assert!(trace.steps.is_empty());
        for (a, b) in out.iter().zip(&q) {
            assert!(a.approx_eq(b, 1e-12));
        }
    }

    #[test]
    fn repair_single_step_matches_alpha_formula() {
        // both q_i are uniform on {-2, 2}; the targets keep the pooled
        // measure but shift mass, so mean(q_1) must rise by eps. One exchange
        // of the extreme atoms suffices, with alpha = eps / (bar I1 - bar I2).
        let eps = 0.125;
        let a = eps / 4.0;
        let q1 = half(-2.0, 2.0);
        let q2 = half(-2.0, 2.0);
        let t1 = DiscreteMeasure::new(vec![-2.0, 2.0], vec![0.5 - a, 0.5 + a]).unwrap();
        let t2 = DiscreteMeasure::new(vec![-2.0, 2.0], vec![0.5 + a, 0.5 - a]).unwrap();
        assert!((t1.mean().unwrap() - eps).abs() < 1e-12);
        let (out, trace) =
            repair_barycenters(&[q1, q2], &[t1.clone(), t2.clone()], 1e-10).unwrap();
        assert_eq!(trace.steps.len(), 1);
        let step = &trace.steps[0];
        // I1 = {2} from the donor, I2 = {-2} from the receiver
        assert_eq!(step.high_atoms, vec![2.0]);
        assert_eq!(step.low_atoms, vec![-2.0]);
        assert!((step.amount - eps / 4.0).abs() < 1e-12);
        assert!((out[0].mean().unwrap() - t1.mean().unwrap()).abs() < 1e-12);
        assert!((out[1].mean().unwrap() - t2.mean().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn repair_cascades_through_an_intermediary() {
        // q_1 and q_3 have disjoint hulls; both overlap q_2, so the mismatch
        // must travel through the middle index
        let a = 1.0 / 32.0;
        let q1 = half(-4.0, -1.0);
        let q2 = half(-2.0, 2.0);
        let q3 = half(1.0, 4.0);
        let t1 = DiscreteMeasure::new(vec![-4.0, -2.0, -1.0], vec![0.5 - a, a, 0.5]).unwrap();
        let t2 = DiscreteMeasure::new(
            vec![-4.0, -2.0, 2.0, 4.0],
            vec![a, 0.5 - a, 0.5 - a, a],
        )
        .unwrap();
        let t3 = DiscreteMeasure::new(vec![1.0, 2.0, 4.0], vec![0.5, a, 0.5 - a]).unwrap();
        let q = vec![q1, q2, q3];
        let targets = vec![t1, t2, t3];
        assert!(pooled_deviation(&pooled(&q), &pooled(&targets)) < 1e-12);
        let (out, trace) = repair_barycenters(&q, &targets, 1e-10).unwrap();
        assert!(trace.steps.len() >= 2, "expected a multi-step cascade");
        for (o, t) in out.iter().zip(&targets) {
            assert!((o.mean().unwrap() - t.mean().unwrap()).abs() <= 1e-10);
            assert!(o.is_probability());
        }
        assert!(pooled_deviation(&pooled(&out), &pooled(&targets)) < 1e-10);
    }

    #[test]
    fn repair_disjoint_hulls_fails() {
        // pooled measures agree but the hulls [-3,-2] and [2,3] are disjoint,
        // so the mismatched barycenters cannot be fixed
        let q = vec![half(-3.0, -2.0), half(2.0, 3.0)];
        let t1 =
            DiscreteMeasure::new(vec![-3.0, -2.0, 2.0], vec![0.5, 0.25, 0.25]).unwrap();
        let t2 = DiscreteMeasure::new(vec![-2.0, 2.0, 3.0], vec![0.25, 0.25, 0.5]).unwrap();
        assert!(pooled_deviation(&pooled(&q), &pooled(&[t1.clone(), t2.clone()])) < 1e-12);
        assert!(matches!(
            repair_barycenters(&q, &[t1, t2], 1e-10),
            Err(Error::RepairFailed { .. })
        ));
    }

    #[test]
    fn mart_competitors_identity_and_constraints() {
        let p = vec![half(-1.0, 1.0), half(-2.0, 2.0)];
        // q: same means (all zero), same pooled measure
        let q = vec![
            DiscreteMeasure::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0.25, 0.25, 0.25, 0.25])
                .unwrap(),
            DiscreteMeasure::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0.25, 0.25, 0.25, 0.25])
                .unwrap(),
        ];
        let out = build_mart_competitors(&p, &q, &p).unwrap();
        for (a, b) in out.iter().zip(&q) {
            assert!(a.approx_eq(b, 1e-10));
        }
    }

    #[test]
    fn mart_competitors_converge_along_a_geometric_schedule() {
        let p = vec![half(-1.0, 1.0), half(-2.0, 2.0)];
        let q = vec![
            DiscreteMeasure::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0.25, 0.25, 0.25, 0.25])
                .unwrap(),
            DiscreteMeasure::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0.25, 0.25, 0.25, 0.25])
                .unwrap(),
        ];
        let mut last = f64::INFINITY;
        for k in 1..=10 {
            let eps = 0.5f64.powi(k);
            // asymmetric perturbation so the repair does real work
            let p_new = vec![p[0].translated(eps), p[1].translated(-eps)];
            let out = build_mart_competitors(&p, &q, &p_new).unwrap();
            let dist: f64 = out
                .iter()
                .zip(&q)
                .map(|(a, b)| wasserstein(a, b, 1.0).unwrap())
                .fold(0.0, f64::max);
            assert!(dist <= last + 1e-12, "distance increased at k={k}");
            last = dist;
        }
        assert!(last < 1e-2, "final distance {last}");
    }

    #[test]
    fn trace_format_mentions_steps() {
        let a = 0.125 / 4.0;
        let q = vec![half(-2.0, 2.0), half(-2.0, 2.0)];
        let targets = vec![
            DiscreteMeasure::new(vec![-2.0, 2.0], vec![0.5 - a, 0.5 + a]).unwrap(),
            DiscreteMeasure::new(vec![-2.0, 2.0], vec![0.5 + a, 0.5 - a]).unwrap(),
        ];
        let (_, trace) = repair_barycenters(&q, &targets, 1e-10).unwrap();
        let text = format_trace(&trace);
        assert!(text.starts_with("steps: 1"));
        assert!(text.contains("alpha="));
        assert!(text.contains("residuals:"));
    }
}
