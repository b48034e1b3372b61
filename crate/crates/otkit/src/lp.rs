//! Dense linear programming: minimize `c·x` subject to `A x = b`, `x >= 0`.
//!
//! The solver is a two-phase tableau simplex using Bland's anti-cycling rule
//! (lowest eligible index enters; ratio ties leave by lowest basic index), so
//! every solve is deterministic. A brute-force vertex enumerator doubles as
//! an independent oracle for small instances, and [`solve_lp_rational`] runs
//! the same pivoting in exact arithmetic.

use itertools::Itertools;
use num::rational::BigRational;
use num::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::tol;

/// Equality-form linear program. All variables are implicitly nonnegative.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    /// Objective coefficients (minimized), length `n`.
    pub objective: Vec<f64>,
    /// Dense `m x n` constraint matrix.
    pub constraints: Vec<Vec<f64>>,
    /// Right-hand side, length `m`.
    pub rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.constraints.len() != self.rhs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} constraint rows vs {} rhs entries",
                self.constraints.len(),
                self.rhs.len()
            )));
        }
        for row in &self.constraints {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "constraint row of length {} vs {} variables",
                    row.len(),
                    n
                )));
            }
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.rhs.iter().all(|v| v.is_finite())
            && self
                .constraints
                .iter()
                .all(|row| row.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::NumericalFailure(
                "non-finite coefficient in linear program".into(),
            ));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        let mut s: f64 = 1.0;
        for v in self.objective.iter().chain(self.rhs.iter()) {
            s = s.max(v.abs());
        }
        for row in &self.constraints {
            for v in row {
                s = s.max(v.abs());
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values, empty unless `status == Optimal`.
    pub primal: Vec<f64>,
    /// Objective value, meaningful only when `status == Optimal`.
    pub value: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            primal: Vec::new(),
            value: f64::NAN,
            iterations,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_TOL: f64 = 1e-9;
const CONDITION_LIMIT: f64 = 1e12;

/// Solves the program with the two-phase Bland simplex.
///
/// The returned basic solution is certified: nonnegative up to 1e-10 and
/// feasible to [`tol::FEASIBILITY`] against the original data. Whenever the
/// floating-point pass cannot certify optimality — conditioning trouble, or
/// an infeasible/unbounded verdict that roundoff on nearly parallel columns
/// can fake — the exact rational solver re-decides the instance, so results
/// are never silently wrong.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    match solve_lp_float(lp) {
        Ok(sol) if sol.status == LpStatus::Optimal => Ok(sol),
        Ok(_) => solve_lp_rational(lp),
        Err(Error::NumericalFailure(_)) => solve_lp_rational(lp),
        Err(e) => Err(e),
    }
}

fn solve_lp_float(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_constraints();
    let scale = lp.scale();

    // Tableau layout: columns 0..n original, n..n+m artificial, last = rhs.
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in lp.constraints.iter().enumerate() {
        let flip = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let mut r = vec![0.0; width];
        for (j, &a) in row.iter().enumerate() {
            r[j] = flip * a;
        }
        r[n + i] = 1.0;
        r[width - 1] = flip * lp.rhs[i];
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut alive: Vec<bool> = vec![true; m];
    let mut iterations = 0usize;
    let iter_cap = 10_000 + 200 * (n + m);

    // Phase 1: minimize the sum of artificials. Reduced costs for the
    // original columns are the negated column sums.
    let mut red = vec![0.0; n + m];
    for j in 0..n {
        red[j] = -t.iter().map(|r| r[j]).sum::<f64>();
    }
    let phase1_status = run_phase(
        &mut t,
        &mut basis,
        &alive,
        &mut red,
        n + m,
        &mut iterations,
        iter_cap,
        scale,
    )?;
    if phase1_status.is_some() {
        // the artificial objective is bounded below by zero; an unbounded
        // verdict can only come from degraded pivots
        return Err(Error::NumericalFailure(
            "phase 1 reported unbounded".into(),
        ));
    }

    let phase1_obj: f64 = t
        .iter()
        .enumerate()
        .filter(|(i, _)| basis[*i] >= n)
        .map(|(_, row)| row[width - 1])
        .sum();
    if phase1_obj > tol::FEASIBILITY.max(1e-7 * scale) {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible, iterations));
    }

    // Accepting the tiny phase-1 defect means solving for the nearest
    // consistent rhs: basic artificials are pinned to zero so the pivots
    // below cannot push other rows negative.
    for i in 0..m {
        if basis[i] >= n {
            t[i][width - 1] = 0.0;
        }
    }

    // Drive remaining artificials out of the basis; rows that cannot pivot on
    // an original column are redundant and get retired.
    for i in 0..m {
        if basis[i] < n || !alive[i] {
            continue;
        }
        let entering = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL);
        match entering {
            Some(j) => {
                pivot(&mut t, &mut red, i, j, width);
                basis[i] = j;
            }
            None => alive[i] = false,
        }
    }

    // Phase 2: real objective. Reduced costs from scratch.
    for j in 0..n + m {
        let cj = if j < n { lp.objective[j] } else { 0.0 };
        let mut r = cj;
        for (i, row) in t.iter().enumerate() {
            if alive[i] && basis[i] < n {
                r -= lp.objective[basis[i]] * row[j];
            }
        }
        red[j] = r;
    }
    if let Some(status) = run_phase(
        &mut t,
        &mut basis,
        &alive,
        &mut red,
        n, // artificials may not re-enter
        &mut iterations,
        iter_cap,
        scale,
    )? {
        return Ok(LpSolution::non_optimal(status, iterations));
    }

    // Extract the solution. The tableau accumulates roundoff over pivots, so
    // the basic values are re-derived from the original data by a fresh LU
    // solve on the final basis whenever possible.
    let mut x = vec![0.0; n];
    for (i, row) in t.iter().enumerate() {
        if alive[i] && basis[i] < n {
            x[basis[i]] = row[width - 1];
        }
    }
    if let Some(refined) = refine_basic_solution(lp, &basis, &alive, scale) {
        if refined.iter().all(|&v| v >= -1e-10)
            && residual(lp, &refined) <= residual(lp, &x)
        {
            x = refined;
        }
    }
    for &v in &x {
        if v < -1e-10 {
            return Err(Error::NumericalFailure(format!(
                "negative basic value {v} in simplex solution"
            )));
        }
    }
    let resid = residual(lp, &x);
    if resid > tol::FEASIBILITY {
        return Err(Error::NumericalFailure(format!(
            "constraint residual {resid} exceeds tolerance"
        )));
    }
    let value = lp
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum::<f64>();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal: x,
        value,
        iterations,
    })
}

// Solves the square system formed by an independent row set and the basic
// columns; exact basis values without accumulated pivot error.
fn refine_basic_solution(
    lp: &LinearProgram,
    basis: &[usize],
    alive: &[bool],
    scale: f64,
) -> Option<Vec<f64>> {
    let n = lp.num_vars();
    let basic: Vec<usize> = basis
        .iter()
        .enumerate()
        .filter(|&(i, &b)| alive[i] && b < n)
        .map(|(_, &b)| b)
        .collect();
    let rows = independent_rows(lp, scale)?;
    if rows.len() != basic.len() {
        return None;
    }
    let mut sub = vec![vec![0.0; basic.len()]; rows.len()];
    let mut rhs = vec![0.0; rows.len()];
    for (r, &ri) in rows.iter().enumerate() {
        for (c, &bj) in basic.iter().enumerate() {
            sub[r][c] = lp.constraints[ri][bj];
        }
        rhs[r] = lp.rhs[ri];
    }
    let z = lu_solve(sub, rhs, 1e-13 * scale.max(1.0))?;
    let mut x = vec![0.0; n];
    for (c, &bj) in basic.iter().enumerate() {
        x[bj] = z[c];
    }
    Some(x)
}

/// Max-norm of `A x - b`.
pub fn residual(lp: &LinearProgram, x: &[f64]) -> f64 {
    lp.constraints
        .iter()
        .zip(&lp.rhs)
        .map(|(row, &b)| {
            (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs()
        })
        .fold(0.0, f64::max)
}

// Runs Bland pivots until optimal (returns None) or unbounded.
#[allow(clippy::too_many_arguments)]
fn run_phase(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    alive: &[bool],
    red: &mut [f64],
    allowed_cols: usize,
    iterations: &mut usize,
    iter_cap: usize,
    scale: f64,
) -> Result<Option<LpStatus>> {
    let width = t.first().map_or(1, |r| r.len());
    loop {
        // Bland: lowest index with negative reduced cost enters.
        let entering = (0..allowed_cols).find(|&j| red[j] < -REDUCED_TOL);
        let Some(col) = entering else {
            return Ok(None);
        };
        // Ratio test; ties leave by lowest basic-variable index.
        let mut best: Option<(f64, usize, usize)> = None; // (ratio, basis idx, row)
        for (i, row) in t.iter().enumerate() {
            if !alive[i] || row[col] <= PIVOT_TOL {
                continue;
            }
            let ratio = row[width - 1] / row[col];
            let better = match best {
                None => true,
                Some((r, b, _)) => {
                    ratio < r - 1e-12 || (ratio <= r + 1e-12 && basis[i] < b)
                }
            };
            if better {
                best = Some((ratio, basis[i], i));
            }
        }
        let Some((_, _, row)) = best else {
            return Ok(Some(LpStatus::Unbounded));
        };
        pivot(t, red, row, col, width);
        basis[row] = col;
        // rhs entries are nonnegative in exact arithmetic; clamp roundoff so
        // later ratio tests are not misled
        let clamp = -1e-9 * scale.max(1.0);
        for r in t.iter_mut() {
            let b = &mut r[width - 1];
            if *b < 0.0 && *b > clamp {
                *b = 0.0;
            }
        }
        *iterations += 1;
        if *iterations > iter_cap {
            return Err(Error::NumericalFailure(format!(
                "simplex iteration cap {iter_cap} exceeded"
            )));
        }
        let worst = t
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if worst > CONDITION_LIMIT * scale.max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "tableau entries grew to {worst}; conditioning degraded"
            )));
        }
    }
}

fn pivot(t: &mut [Vec<f64>], red: &mut [f64], row: usize, col: usize, width: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i == row {
            continue;
        }
        let f = t[i][col];
        if f != 0.0 {
            for j in 0..width {
                t[i][j] -= f * t[row][j];
            }
            t[i][col] = 0.0;
        }
    }
    let f = red[col];
    if f != 0.0 {
        for j in 0..width - 1 {
            red[j] -= f * t[row][j];
        }
        red[col] = 0.0;
    }
}

/// Enumerates every basic feasible solution of the program.
///
/// Guarded: refuses instances with more than 24 variables or more than 10^6
/// candidate bases. An infeasible system yields an empty list. Solutions are
/// deduplicated (two bases describing the same vertex count once) and sorted
/// lexicographically by primal vector.
pub fn enumerate_vertices(lp: &LinearProgram) -> Result<Vec<LpSolution>> {
    lp.validate()?;
    let n = lp.num_vars();
    let scale = lp.scale();

    let Some(pivot_rows) = independent_rows(lp, scale) else {
        return Ok(Vec::new()); // inconsistent system: no feasible point at all
    };
    let rank = pivot_rows.len();
    if n > 24 {
        return Err(Error::TooLarge(format!("{n} variables exceeds 24")));
    }
    if binomial(n, rank) > 1_000_000 {
        return Err(Error::TooLarge(format!(
            "C({n}, {rank}) candidate bases exceed 10^6"
        )));
    }

    let mut vertices: Vec<LpSolution> = Vec::new();
    for combo in (0..n).combinations(rank) {
        let mut sub = vec![vec![0.0; rank]; rank];
        let mut rhs = vec![0.0; rank];
        for (r, &i) in pivot_rows.iter().enumerate() {
            for (c, &j) in combo.iter().enumerate() {
                sub[r][c] = lp.constraints[i][j];
            }
            rhs[r] = lp.rhs[i];
        }
        let Some(z) = lu_solve(sub, rhs, 1e-10 * scale.max(1.0)) else {
            continue;
        };
        if z.iter().any(|&v| v < -tol::FEASIBILITY) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (c, &j) in combo.iter().enumerate() {
            x[j] = z[c].max(0.0);
        }
        if residual(lp, &x) > tol::FEASIBILITY.max(1e-8 * scale) {
            continue;
        }
        if vertices.iter().any(|v| max_diff(&v.primal, &x) <= 1e-9) {
            continue;
        }
        let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        vertices.push(LpSolution {
            status: LpStatus::Optimal,
            primal: x,
            value,
            iterations: 0,
        });
    }
    vertices.sort_by(|a, b| {
        a.primal
            .iter()
            .zip(&b.primal)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(vertices)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// Gaussian elimination with partial pivoting on [A | b]. Returns the indices
// of an independent row set, or None if the system is inconsistent.
fn independent_rows(lp: &LinearProgram, scale: f64) -> Option<Vec<usize>> {
    let m = lp.num_constraints();
    let n = lp.num_vars();
    let mut aug: Vec<Vec<f64>> = lp
        .constraints
        .iter()
        .zip(&lp.rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let mut row_of: Vec<usize> = (0..m).collect();
    let eps = 1e-10 * scale.max(1.0);
    let mut pivots = Vec::new();
    let mut next = 0usize;
    for col in 0..n {
        let best = (next..m).max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()));
        let Some(best) = best else { break };
        if aug[best][col].abs() <= eps {
            continue;
        }
        aug.swap(next, best);
        row_of.swap(next, best);
        for i in next + 1..m {
            let f = aug[i][col] / aug[next][col];
            if f != 0.0 {
                for j in col..=n {
                    aug[i][j] -= f * aug[next][j];
                }
            }
        }
        pivots.push(row_of[next]);
        next += 1;
        if next == m {
            break;
        }
    }
    for row in aug.iter().skip(next) {
        if row[n].abs() > tol::FEASIBILITY.max(eps) {
            return None;
        }
    }
    Some(pivots)
}

fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, eps: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= eps {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for j in col..n {
                    a[i][j] -= f * a[col][j];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > 10_000_000 {
            return acc;
        }
    }
    acc
}

/// Exact-rational variant of [`solve_lp`]: identical Bland pivoting carried
/// out in arbitrary-precision rational arithmetic, with the floating inputs
/// converted exactly.
///
/// Generic floating-point instances are often *exactly* infeasible at the
/// 1e-16 level (e.g. martingale rows whose means differ by one rounding),
/// which the crate's tolerance contract deliberately accepts; the phase-1
/// optimum is therefore compared against 1e-10 times the data scale, and the
/// final solution is certified against [`tol::FEASIBILITY`] like the
/// floating solver's.
pub fn solve_lp_rational(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_constraints();
    let q = |v: f64| BigRational::from_f64(v).expect("finite float converts exactly");
    let zero = BigRational::zero;

    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for (i, row) in lp.constraints.iter().enumerate() {
        let neg = lp.rhs[i] < 0.0;
        let mut r = vec![zero(); width];
        for (j, &a) in row.iter().enumerate() {
            r[j] = if neg { -q(a) } else { q(a) };
        }
        r[n + i] = q(1.0);
        r[width - 1] = if neg { -q(lp.rhs[i]) } else { q(lp.rhs[i]) };
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut alive = vec![true; m];
    let mut iterations = 0usize;

    let mut red: Vec<BigRational> = vec![zero(); n + m];
    for j in 0..n {
        let mut s = zero();
        for row in &t {
            s += &row[j];
        }
        red[j] = -s;
    }
    if let Some(status) =
        rational_phase(&mut t, &mut basis, &alive, &mut red, n + m, &mut iterations)
    {
        debug_assert_ne!(status, LpStatus::Unbounded, "phase 1 is bounded below");
    }
    let phase1: BigRational = t
        .iter()
        .enumerate()
        .filter(|(i, _)| basis[*i] >= n)
        .map(|(_, row)| row[width - 1].clone())
        .sum();
    if phase1 > q(1e-10 * lp.scale().max(1.0)) {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible, iterations));
    }
    // Accepting the tiny defect = solving for the nearest consistent rhs:
    // pin basic artificials to zero, keeping every later pivot feasible.
    for i in 0..m {
        if basis[i] >= n {
            t[i][width - 1] = zero();
        }
    }
    for i in 0..m {
        if basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| !t[i][j].is_zero()) {
            Some(j) => {
                rational_pivot(&mut t, &mut red, i, j, width);
                basis[i] = j;
            }
            None => alive[i] = false,
        }
    }
    for j in 0..n + m {
        let mut r = if j < n { q(lp.objective[j]) } else { zero() };
        for (i, row) in t.iter().enumerate() {
            if alive[i] && basis[i] < n {
                r -= q(lp.objective[basis[i]]) * &row[j];
            }
        }
        red[j] = r;
    }
    if let Some(status) = rational_phase(&mut t, &mut basis, &alive, &mut red, n, &mut iterations) {
        return Ok(LpSolution::non_optimal(status, iterations));
    }

    let mut x = vec![zero(); n];
    for (i, row) in t.iter().enumerate() {
        if alive[i] && basis[i] < n {
            x[basis[i]] = row[width - 1].clone();
        }
    }
    let value: BigRational = lp
        .objective
        .iter()
        .enumerate()
        .map(|(j, &c)| q(c) * &x[j])
        .sum();
    let primal: Vec<f64> = x.iter().map(|v| v.to_f64().unwrap()).collect();
    let resid = residual(lp, &primal);
    if resid > tol::FEASIBILITY {
        return Err(Error::NumericalFailure(format!(
            "rational solution residual {resid} exceeds tolerance"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        value: value.to_f64().unwrap(),
        iterations,
    })
}

fn rational_phase(
    t: &mut [Vec<BigRational>],
    basis: &mut [usize],
    alive: &[bool],
    red: &mut [BigRational],
    allowed_cols: usize,
    iterations: &mut usize,
) -> Option<LpStatus> {
    let width = t.first().map_or(1, |r| r.len());
    loop {
        let Some(col) = (0..allowed_cols).find(|&j| red[j].is_negative()) else {
            return None;
        };
        let mut best: Option<(BigRational, usize, usize)> = None;
        for (i, row) in t.iter().enumerate() {
            if !alive[i] || !row[col].is_positive() {
                continue;
            }
            let ratio = &row[width - 1] / &row[col];
            let better = match &best {
                None => true,
                Some((r, b, _)) => ratio < *r || (ratio == *r && basis[i] < *b),
            };
            if better {
                best = Some((ratio, basis[i], i));
            }
        }
        let Some((_, _, row)) = best else {
            return Some(LpStatus::Unbounded);
        };
        rational_pivot(t, red, row, col, width);
        basis[row] = col;
        *iterations += 1;
    }
}

fn rational_pivot(
    t: &mut [Vec<BigRational>],
    red: &mut [BigRational],
    row: usize,
    col: usize,
    width: usize,
) {
    let p = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v /= &p;
    }
    for i in 0..t.len() {
        if i == row || t[i][col].is_zero() {
            continue;
        }
        let f = t[i][col].clone();
        for j in 0..width {
            let delta = &f * &t[row][j];
            t[i][j] -= delta;
        }
    }
    if !red[col].is_zero() {
        let f = red[col].clone();
        for j in 0..width - 1 {
            let delta = &f * &t[row][j];
            red[j] -= delta;
        }
    }
}
