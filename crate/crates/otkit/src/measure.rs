//! Finitely supported measures on the real line.
//!
//! A [`DiscreteMeasure`] is a sorted list of atoms with nonnegative weights.
//! Construction canonicalizes: atoms are sorted, atoms closer than
//! [`tol::ATOM_MERGE`] are merged (weights summed, location mass-averaged) and
//! zero-weight atoms are dropped. Probability measures carry total mass 1 up
//! to [`tol::PROBABILITY_MASS`].

use crate::error::{Error, Result};
use crate::tol;

/// A nonnegative measure on the real line with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from parallel atom/weight lists, canonicalizing.
    ///
    /// Weights must be nonnegative up to a small slack (tiny negatives coming
    /// out of LP solutions are clamped to zero).
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} atoms vs {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).collect();
        Self::from_pairs(pairs)
    }

    /// Builds a measure from `(atom, weight)` pairs, canonicalizing.
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, w) in &pairs {
            if !a.is_finite() || !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite entry ({a}, {w})"
                )));
            }
            if w < -1e-9 {
                return Err(Error::InvalidInput(format!(
                    "negative weight {w} at atom {a}"
                )));
            }
        }
        let mut pairs: Vec<(f64, f64)> =
            pairs.into_iter().map(|(a, w)| (a, w.max(0.0))).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

        // Merge runs of atoms within the merge tolerance; the merged atom sits
        // at the mass-weighted barycenter of the run.
        let mut atoms = Vec::with_capacity(pairs.len());
        let mut weights = Vec::with_capacity(pairs.len());
        let mut i = 0;
        while i < pairs.len() {
            let mut j = i + 1;
            while j < pairs.len() && pairs[j].0 - pairs[j - 1].0 <= tol::ATOM_MERGE {
                j += 1;
            }
            let w: f64 = pairs[i..j].iter().map(|p| p.1).sum();
            if w > 0.0 {
                // exactly equal atoms keep their value bit-for-bit; only
                // genuinely distinct near-duplicates get mass-averaged
                let a = if pairs[j - 1].0 == pairs[i].0 {
                    pairs[i].0
                } else {
                    pairs[i..j].iter().map(|p| p.0 * p.1).sum::<f64>() / w
                };
                atoms.push(a);
                weights.push(w);
            }
            i = j;
        }
        Ok(Self { atoms, weights })
    }

    /// The Dirac measure at `x`.
    pub fn dirac(x: f64) -> Self {
        Self {
            atoms: vec![x],
            weights: vec![1.0],
        }
    }

    /// Uniform probability measure on the given atoms.
    pub fn uniform(atoms: Vec<f64>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::InvalidInput("uniform on empty support".into()));
        }
        let w = 1.0 / n as f64;
        Self::new(atoms, vec![w; n])
    }

    /// The zero measure.
    pub fn zero() -> Self {
        Self {
            atoms: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= tol::PROBABILITY_MASS
    }

    pub(crate) fn ensure_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::NotProbability {
                mass: self.total_mass(),
            })
        }
    }

    /// Mass carried by the atom at `x`, matched within `atom_tol`.
    pub fn mass_at(&self, x: f64, atom_tol: f64) -> f64 {
        match self
            .atoms
            .binary_search_by(|a| a.total_cmp(&x))
        {
            Ok(i) => self.weights[i],
            Err(i) => {
                let mut m = 0.0;
                if i < self.atoms.len() && (self.atoms[i] - x).abs() <= atom_tol {
                    m += self.weights[i];
                }
                if i > 0 && (x - self.atoms[i - 1]).abs() <= atom_tol {
                    m += self.weights[i - 1];
                }
                m
            }
        }
    }

    /// Barycenter of the measure.
    pub fn mean(&self) -> Result<f64> {
        let mass = self.total_mass();
        if mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(self
            .atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| a * w)
            .sum::<f64>()
            / mass)
    }

    /// Variance of the measure around its mean.
    pub fn variance(&self) -> Result<f64> {
        let m = self.mean()?;
        let mass = self.total_mass();
        Ok(self
            .atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * (a - m) * (a - m))
            .sum::<f64>()
            / mass)
    }

    /// Call potential `t -> ∫ (x - t)_+ d self`.
    pub fn call_potential(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * (a - t).max(0.0))
            .sum()
    }

    /// Pointwise sum of two measures.
    pub fn add(&self, other: &Self) -> Self {
        let mut pairs: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .collect();
        pairs.extend(other.atoms.iter().copied().zip(other.weights.iter().copied()));
        Self::from_pairs(pairs).expect("sum of valid measures is valid")
    }

    /// The measure scaled by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor >= 0.0, "scale factor must be nonnegative");
        Self {
            atoms: self.atoms.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }

    /// The measure normalized to total mass one.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.total_mass();
        if mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(self.scaled(1.0 / mass))
    }

    /// The measure translated by `t`.
    pub fn translated(&self, t: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| a + t).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Componentwise comparison up to `tol` on atoms and weights.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| (a - b).abs() <= tol)
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Convex hull of the support as `(min, max)`; `None` for the zero measure.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        if self.atoms.is_empty() {
            None
        } else {
            Some((self.atoms[0], *self.atoms.last().unwrap()))
        }
    }
}

/// Sums a family of measures.
pub fn pooled(measures: &[DiscreteMeasure]) -> DiscreteMeasure {
    let mut acc = DiscreteMeasure::zero();
    for m in measures {
        acc = acc.add(m);
    }
    acc
}

/// r-Wasserstein distance between probability measures via the quantile
/// (monotone) coupling, which is optimal on the real line.
///
/// Returns the r-th root of the transport cost; for `r = 1` this coincides
/// with the raw infimum.
pub fn wasserstein(p: &DiscreteMeasure, q: &DiscreteMeasure, r: f64) -> Result<f64> {
    p.ensure_probability()?;
    q.ensure_probability()?;
    if r < 1.0 {
        return Err(Error::InvalidInput(format!("order r = {r} must be >= 1")));
    }
    let cost = quantile_cost(p, q, r);
    Ok(if r == 1.0 { cost } else { cost.powf(1.0 / r) })
}

/// Raw transport cost `∫ |x-y|^r` of the quantile coupling between two
/// measures of equal (not necessarily unit) mass.
pub fn wasserstein_power_raw(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    r: f64,
) -> Result<f64> {
    let mp = p.total_mass();
    let mq = q.total_mass();
    if (mp - mq).abs() > 1e-9 {
        return Err(Error::DimensionMismatch(format!(
            "mass mismatch {mp} vs {mq}"
        )));
    }
    if mp <= 0.0 {
        return Ok(0.0);
    }
    Ok(quantile_cost(p, q, r))
}

// Walks the two cumulative weight sequences in lockstep; each merged segment
// couples one atom of p with one atom of q.
fn quantile_cost(p: &DiscreteMeasure, q: &DiscreteMeasure, r: f64) -> f64 {
    let mut cost = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    let mut rem_p = if p.weights.is_empty() { 0.0 } else { p.weights[0] };
    let mut rem_q = if q.weights.is_empty() { 0.0 } else { q.weights[0] };
    while i < p.atoms.len() && j < q.atoms.len() {
        let m = rem_p.min(rem_q);
        if m > 0.0 {
            let d = (p.atoms[i] - q.atoms[j]).abs();
            cost += m * if r == 1.0 { d } else { d.powf(r) };
        }
        rem_p -= m;
        rem_q -= m;
        if rem_p <= 0.0 {
            i += 1;
            if i < p.weights.len() {
                rem_p = p.weights[i];
            }
        }
        if rem_q <= 0.0 {
            j += 1;
            if j < q.weights.len() {
                rem_q = q.weights[j];
            }
        }
    }
    cost
}

/// Checks whether `mu` is smaller than `nu` in convex order.
///
/// Means must agree up to [`tol::CONVEX_ORDER`] and the call potentials of
/// `mu` must be dominated by those of `nu` at every atom of either support
/// (the potentials are piecewise linear with kinks exactly at the atoms, so
/// checking there is sufficient).
pub fn convex_order(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<bool> {
    mu.ensure_probability()?;
    nu.ensure_probability()?;
    let (m_mu, m_nu) = (mu.mean()?, nu.mean()?);
    if (m_mu - m_nu).abs() > tol::CONVEX_ORDER {
        return Ok(false);
    }
    let dominated = mu
        .atoms
        .iter()
        .chain(nu.atoms.iter())
        .all(|&t| mu.call_potential(t) <= nu.call_potential(t) + tol::CONVEX_ORDER);
    Ok(dominated)
}

/// Collapses each grid cell `[k·mesh, (k+1)·mesh)` of `mu` to its conditional
/// barycenter. The result is smaller than `mu` in convex order and within
/// `mesh` of it in 1-Wasserstein distance.
pub fn bin(mu: &DiscreteMeasure, mesh: f64) -> Result<DiscreteMeasure> {
    mu.ensure_probability()?;
    if !(mesh > 0.0) {
        return Err(Error::InvalidInput(format!("mesh {mesh} must be > 0")));
    }
    // (cell, mass, mass*atom, count, first atom); single-atom cells keep
    // their atom bit-exact instead of taking a multiply-divide round trip
    let mut cells: Vec<(i64, f64, f64, usize, f64)> = Vec::new();
    for (&a, &w) in mu.atoms.iter().zip(&mu.weights) {
        let k = (a / mesh).floor() as i64;
        match cells.last_mut() {
            Some(last) if last.0 == k => {
                last.1 += w;
                last.2 += w * a;
                last.3 += 1;
            }
            _ => cells.push((k, w, w * a, 1, a)),
        }
    }
    DiscreteMeasure::from_pairs(
        cells
            .into_iter()
            .map(|(_, w, wa, count, first)| (if count == 1 { first } else { wa / w }, w))
            .collect(),
    )
}

/// Splits every atom `y` of `nu` into `y - eps` and `y + eps` with half the
/// weight each. The result dominates `nu` in convex order and sits at
/// 1-Wasserstein distance at most `eps` — exactly `eps` whenever `2 eps`
/// does not exceed the smallest gap between atoms, so that the split points
/// do not interleave.
pub fn dilate(nu: &DiscreteMeasure, eps: f64) -> Result<DiscreteMeasure> {
    nu.ensure_probability()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps {eps} must be > 0")));
    }
    let mut pairs = Vec::with_capacity(2 * nu.atoms.len());
    for (&a, &w) in nu.atoms.iter().zip(&nu.weights) {
        pairs.push((a - eps, 0.5 * w));
        pairs.push((a + eps, 0.5 * w));
    }
    DiscreteMeasure::from_pairs(pairs)
}

/// Parses the measure file format: one `location,weight` pair per line,
/// `#` starts a comment.
pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let a = parse_field(fields.next(), lineno, "location")?;
        let w = parse_field(fields.next(), lineno, "weight")?;
        if fields.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: expected `location,weight`",
                lineno + 1
            )));
        }
        pairs.push((a, w));
    }
    DiscreteMeasure::from_pairs(pairs)
}

/// Renders a measure in the `location,weight` line format.
pub fn format_measure(m: &DiscreteMeasure) -> String {
    let mut out = String::new();
    for (a, w) in m.atoms.iter().zip(&m.weights) {
        out.push_str(&format!("{a},{w}\n"));
    }
    out
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

pub(crate) fn parse_field(field: Option<&str>, lineno: usize, what: &str) -> Result<f64> {
    let s = field
        .ok_or_else(|| Error::Parse(format!("line {}: missing {what}", lineno + 1)))?
        .trim();
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {}: bad {what} `{s}`", lineno + 1)))
}
