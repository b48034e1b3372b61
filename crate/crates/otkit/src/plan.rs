//! Transport plans: joint mass matrices on atom grids.

use crate::error::{Error, Result};
use crate::measure::{strip_comment, DiscreteMeasure};
use crate::tol;

/// A coupling between atom grids: mass `mass[i][j]` sits at
/// `(x_atoms[i], y_atoms[j])`. Marginals are implied by the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    x_atoms: Vec<f64>,
    y_atoms: Vec<f64>,
    mass: Vec<Vec<f64>>,
}

impl TransportPlan {
    /// Builds a plan, clamping entries in `[-1e-10, 0)` (LP roundoff) to zero.
    pub fn new(x_atoms: Vec<f64>, y_atoms: Vec<f64>, mass: Vec<Vec<f64>>) -> Result<Self> {
        if mass.len() != x_atoms.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} mass rows vs {} x atoms",
                mass.len(),
                x_atoms.len()
            )));
        }
        for row in &mass {
            if row.len() != y_atoms.len() {
                return Err(Error::DimensionMismatch(format!(
                    "mass row of length {} vs {} y atoms",
                    row.len(),
                    y_atoms.len()
                )));
            }
        }
        let mut clamped = mass;
        for row in &mut clamped {
            for v in row.iter_mut() {
                if !v.is_finite() || *v < -1e-10 {
                    return Err(Error::InvalidInput(format!("bad plan entry {v}")));
                }
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        if !is_strictly_increasing(&x_atoms) || !is_strictly_increasing(&y_atoms) {
            return Err(Error::InvalidInput(
                "plan atom grids must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            x_atoms,
            y_atoms,
            mass: clamped,
        })
    }

    pub fn x_atoms(&self) -> &[f64] {
        &self.x_atoms
    }

    pub fn y_atoms(&self) -> &[f64] {
        &self.y_atoms
    }

    pub fn mass(&self) -> &[Vec<f64>] {
        &self.mass
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.mass[i][j]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().flatten().sum()
    }

    /// First marginal, computed from row sums.
    pub fn mu(&self) -> DiscreteMeasure {
        DiscreteMeasure::new(
            self.x_atoms.clone(),
            self.mass.iter().map(|row| row.iter().sum()).collect(),
        )
        .expect("row sums of a valid plan form a measure")
    }

    /// Second marginal, computed from column sums.
    pub fn nu(&self) -> DiscreteMeasure {
        let weights = (0..self.y_atoms.len())
            .map(|j| self.mass.iter().map(|row| row[j]).sum())
            .collect();
        DiscreteMeasure::new(self.y_atoms.clone(), weights)
            .expect("column sums of a valid plan form a measure")
    }

    /// Mass of row `i`.
    pub fn row_mass(&self, i: usize) -> f64 {
        self.mass[i].iter().sum()
    }

    /// Conditional law of the second coordinate given `x_atoms[i]`; `None`
    /// for zero-mass rows (the disintegration is only defined mu-a.e.).
    pub fn disintegration(&self, i: usize) -> Option<DiscreteMeasure> {
        let mass = self.row_mass(i);
        if mass <= tol::SUPPORT {
            return None;
        }
        Some(
            DiscreteMeasure::new(
                self.y_atoms.clone(),
                self.mass[i].iter().map(|v| v / mass).collect(),
            )
            .expect("normalized row is a measure"),
        )
    }

    /// `(x_i, pi_{x_i})` pairs over positive-mass rows.
    pub fn disintegration_pairs(&self) -> Vec<(f64, DiscreteMeasure)> {
        (0..self.x_atoms.len())
            .filter_map(|i| Some((self.x_atoms[i], self.disintegration(i)?)))
            .collect()
    }

    /// Support of the plan as `(i, j)` index pairs with mass above the
    /// support threshold.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut pts = Vec::new();
        for i in 0..self.x_atoms.len() {
            for j in 0..self.y_atoms.len() {
                if self.mass[i][j] > tol::SUPPORT {
                    pts.push((i, j));
                }
            }
        }
        pts
    }

    /// Checks row and column sums against prescribed marginals.
    pub fn validate_marginals(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        tol: f64,
    ) -> Result<()> {
        let (actual_mu, actual_nu) = (self.mu(), self.nu());
        for (m, name, target) in [(actual_mu, "row", mu), (actual_nu, "column", nu)] {
            if !m.approx_eq(target, tol) {
                return Err(Error::NumericalFailure(format!(
                    "{name} sums deviate from the prescribed marginal"
                )));
            }
        }
        Ok(())
    }

    /// The plan flattened to a measure on the plane, as `((x, y), mass)`.
    pub fn point_masses(&self) -> Vec<(f64, f64, f64)> {
        self.support()
            .into_iter()
            .map(|(i, j)| (self.x_atoms[i], self.y_atoms[j], self.mass[i][j]))
            .collect()
    }
}

fn is_strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite())
}

/// The quantile (monotone) coupling of two equal-mass measures, optimal for
/// every convex cost on the real line.
pub fn quantile_coupling(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<TransportPlan> {
    if (p.total_mass() - q.total_mass()).abs() > 1e-9 {
        return Err(Error::DimensionMismatch(format!(
            "mass mismatch {} vs {}",
            p.total_mass(),
            q.total_mass()
        )));
    }
    let mut mass = vec![vec![0.0; q.support_size()]; p.support_size()];
    let (mut i, mut j) = (0usize, 0usize);
    let mut rem_p = p.weights().first().copied().unwrap_or(0.0);
    let mut rem_q = q.weights().first().copied().unwrap_or(0.0);
    while i < p.support_size() && j < q.support_size() {
        let m = rem_p.min(rem_q);
        if m > 0.0 {
            mass[i][j] += m;
        }
        rem_p -= m;
        rem_q -= m;
        if rem_p <= 0.0 {
            i += 1;
            if i < p.support_size() {
                rem_p = p.weights()[i];
            }
        }
        if rem_q <= 0.0 {
            j += 1;
            if j < q.support_size() {
                rem_q = q.weights()[j];
            }
        }
    }
    TransportPlan::new(p.atoms().to_vec(), q.atoms().to_vec(), mass)
}

/// 1-Wasserstein distance between two plans viewed as measures on the plane
/// with the l1 ground metric `|x - x'| + |y - y'|`. Solved as a transport LP
/// over the supports.
pub fn plan_w1(a: &TransportPlan, b: &TransportPlan) -> Result<f64> {
    let pa = a.point_masses();
    let pb = b.point_masses();
    let ma: f64 = pa.iter().map(|t| t.2).sum();
    let mb: f64 = pb.iter().map(|t| t.2).sum();
    if (ma - mb).abs() > 1e-8 {
        return Err(Error::DimensionMismatch(format!(
            "plan masses {ma} vs {mb}"
        )));
    }
    if pa.is_empty() {
        return Ok(0.0);
    }
    let (na, nb) = (pa.len(), pb.len());
    let mut objective = Vec::with_capacity(na * nb);
    for s in &pa {
        for t in &pb {
            objective.push((s.0 - t.0).abs() + (s.1 - t.1).abs());
        }
    }
    let mut constraints = Vec::with_capacity(na + nb);
    let mut rhs = Vec::with_capacity(na + nb);
    for (s, pt) in pa.iter().enumerate() {
        let mut row = vec![0.0; na * nb];
        for t in 0..nb {
            row[s * nb + t] = 1.0;
        }
        constraints.push(row);
        rhs.push(pt.2);
    }
    for (t, pt) in pb.iter().enumerate() {
        let mut row = vec![0.0; na * nb];
        for s in 0..na {
            row[s * nb + t] = 1.0;
        }
        constraints.push(row);
        rhs.push(pt.2);
    }
    let sol = crate::lp::solve_lp(&crate::lp::LinearProgram {
        objective,
        constraints,
        rhs,
    })?;
    match sol.status {
        crate::lp::LpStatus::Optimal => Ok(sol.value),
        other => Err(Error::NumericalFailure(format!(
            "plan transport LP returned {other:?}"
        ))),
    }
}

/// Parses the plan/table matrix format: a header row of y-atoms with an empty
/// corner cell, then one row per x-atom. `#` comments allowed.
pub fn parse_matrix(text: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let mut y_atoms: Option<Vec<f64>> = None;
    let mut x_atoms = Vec::new();
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match &mut y_atoms {
            None => {
                if !fields[0].is_empty() {
                    return Err(Error::Parse(format!(
                        "line {}: header must start with an empty corner cell",
                        lineno + 1
                    )));
                }
                let atoms: Result<Vec<f64>> = fields[1..]
                    .iter()
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| Error::Parse(format!("line {}: bad y atom `{s}`", lineno + 1)))
                    })
                    .collect();
                y_atoms = Some(atoms?);
            }
            Some(y) => {
                if fields.len() != y.len() + 1 {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} fields, got {}",
                        lineno + 1,
                        y.len() + 1,
                        fields.len()
                    )));
                }
                let x: f64 = fields[0].parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad x atom `{}`", lineno + 1, fields[0]))
                })?;
                let row: Result<Vec<f64>> = fields[1..]
                    .iter()
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| Error::Parse(format!("line {}: bad entry `{s}`", lineno + 1)))
                    })
                    .collect();
                x_atoms.push(x);
                rows.push(row?);
            }
        }
    }
    let y_atoms = y_atoms.ok_or_else(|| Error::Parse("empty matrix".into()))?;
    Ok((x_atoms, y_atoms, rows))
}

pub fn parse_plan(text: &str) -> Result<TransportPlan> {
    let (x, y, mass) = parse_matrix(text)?;
    TransportPlan::new(x, y, mass)
}

/// Renders a plan in the matrix format parsed by [`parse_plan`].
pub fn format_plan(plan: &TransportPlan) -> String {
    format_matrix(plan.x_atoms(), plan.y_atoms(), plan.mass())
}

pub fn format_matrix(x_atoms: &[f64], y_atoms: &[f64], values: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push(',');
    out.push_str(
        &y_atoms
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for (x, row) in x_atoms.iter().zip(values) {
        out.push_str(&x.to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_plan() -> TransportPlan {
        TransportPlan::new(
            vec![-1.0, 1.0],
            vec![-2.0, 2.0],
            vec![vec![0.375, 0.125], vec![0.125, 0.375]],
        )
        .unwrap()
    }

    #[test]
    fn marginals_and_disintegration() {
        let plan = sample_plan();
        assert_eq!(plan.mu().weights(), &[0.5, 0.5]);
        assert_eq!(plan.nu().weights(), &[0.5, 0.5]);
        let row = plan.disintegration(0).unwrap();
        assert_eq!(row.weights(), &[0.75, 0.25]);
        assert_eq!(plan.support().len(), 4);
    }

    #[test]
    fn quantile_coupling_is_monotone() {
        let p = DiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let q = DiscreteMeasure::new(vec![2.0, 3.0], vec![0.25, 0.75]).unwrap();
        let chi = quantile_coupling(&p, &q).unwrap();
        assert!((chi.entry(0, 0) - 0.25).abs() < 1e-12);
        assert!((chi.entry(0, 1) - 0.25).abs() < 1e-12);
        assert!((chi.entry(1, 0) - 0.0).abs() < 1e-12);
        assert!((chi.entry(1, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn plan_w1_of_identical_plans_is_zero() {
        let plan = sample_plan();
        assert!(plan_w1(&plan, &plan).unwrap() < 1e-12);
    }

    #[test]
    fn plan_format_round_trips() {
        let plan = sample_plan();
        let text = format_plan(&plan);
        let back = parse_plan(&text).unwrap();
        assert_eq!(plan, back);
    }
}
