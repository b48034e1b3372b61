//! Cost specifications: pointwise costs `c(x, y)`, barycentric costs built
//! from a convex piecewise-linear function, and generic oracles `C(x, p)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{parse_field, strip_comment, DiscreteMeasure};

/// A pointwise cost function on the plane.
#[derive(Clone)]
pub enum PointwiseCost {
    /// `|y - x|`
    Abs,
    /// `(y - x)^2`
    Square,
    /// Values tabulated on an atom grid.
    Table(CostTable),
    /// Arbitrary callable, used for perturbed costs and tests.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PointwiseCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Abs => write!(f, "Abs"),
            Self::Square => write!(f, "Square"),
            Self::Table(t) => write!(f, "Table({}x{})", t.x_atoms.len(), t.y_atoms.len()),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl PointwiseCost {
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            Self::Abs => Ok((y - x).abs()),
            Self::Square => Ok((y - x) * (y - x)),
            Self::Table(t) => t.eval(x, y),
            Self::Custom(f) => Ok(f(x, y)),
        }
    }

    /// `∫ c(x, ·) dp`, the linear weak cost induced by a pointwise cost.
    pub fn integrate(&self, x: f64, p: &DiscreteMeasure) -> Result<f64> {
        let mut acc = 0.0;
        for (&a, &w) in p.atoms().iter().zip(p.weights()) {
            acc += w * self.eval(x, a)?;
        }
        Ok(acc)
    }

    /// The cost shifted by `delta * g` for a bounded bump `g`.
    pub fn bumped(&self, delta: f64, bump: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>) -> Self {
        let base = self.clone();
        Self::Custom(Arc::new(move |x, y| {
            base.eval(x, y).unwrap_or(f64::NAN) + delta * bump(x, y)
        }))
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "abs" => Ok(Self::Abs),
            "square" => Ok(Self::Square),
            other => Err(Error::Parse(format!(
                "unknown cost family `{other}` (expected `abs` or `square`)"
            ))),
        }
    }
}

/// Pointwise cost tabulated on a finite grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    pub x_atoms: Vec<f64>,
    pub y_atoms: Vec<f64>,
    /// Row-major values, `values[i][j] = c(x_atoms[i], y_atoms[j])`.
    pub values: Vec<Vec<f64>>,
}

impl CostTable {
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let i = lookup(&self.x_atoms, x).ok_or(Error::CostNotDefined { x, y })?;
        let j = lookup(&self.y_atoms, y).ok_or(Error::CostNotDefined { x, y })?;
        Ok(self.values[i][j])
    }
}

fn lookup(atoms: &[f64], v: f64) -> Option<usize> {
    atoms.iter().position(|a| (a - v).abs() <= 1e-9)
}

/// Convex piecewise-linear function given as the maximum of affine pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    /// `(slope, intercept)` pairs; the function is their pointwise maximum.
    pub pieces: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput(
                "piecewise-linear function needs at least one piece".into(),
            ));
        }
        if pieces
            .iter()
            .any(|&(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidInput("non-finite affine piece".into()));
        }
        Ok(Self { pieces })
    }

    /// The absolute value, `max(x, -x)`.
    pub fn abs() -> Self {
        Self {
            pieces: vec![(1.0, 0.0), (-1.0, 0.0)],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .map(|&(a, b)| a * x + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum over a closed interval. For a convex function this is attained
    /// at an endpoint or at a crossing of two pieces inside the interval.
    pub fn min_on(&self, lo: f64, hi: f64) -> f64 {
        let mut best = self.eval(lo).min(self.eval(hi));
        for (k, &(a1, b1)) in self.pieces.iter().enumerate() {
            for &(a2, b2) in &self.pieces[k + 1..] {
                if (a1 - a2).abs() > 0.0 {
                    let x = (b2 - b1) / (a1 - a2);
                    if x > lo && x < hi {
                        best = best.min(self.eval(x));
                    }
                }
            }
        }
        best
    }

    /// Growth constant `c0` with `|θ(x)| <= c0 (1 + |x|)`; piecewise-linear
    /// functions have maximal growth of order one.
    pub fn growth_constant(&self) -> f64 {
        let slope = self
            .pieces
            .iter()
            .map(|&(a, _)| a.abs())
            .fold(0.0, f64::max);
        let intercept = self
            .pieces
            .iter()
            .map(|&(_, b)| b.abs())
            .fold(0.0, f64::max);
        slope.max(intercept)
    }
}

/// A black-box weak cost `C(x, p)`.
#[derive(Clone)]
pub struct GenericCost {
    pub name: String,
    eval: Arc<dyn Fn(f64, &DiscreteMeasure) -> f64 + Send + Sync>,
}

impl fmt::Debug for GenericCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenericCost({})", self.name)
    }
}

impl GenericCost {
    pub fn new(
        name: impl Into<String>,
        eval: Arc<dyn Fn(f64, &DiscreteMeasure) -> f64 + Send + Sync>,
    ) -> Self {
        Self {
            name: name.into(),
            eval,
        }
    }

    pub fn eval(&self, x: f64, p: &DiscreteMeasure) -> f64 {
        (self.eval)(x, p)
    }

    /// `min(p({0}), p({1}))` — continuous and concave, the textbook example of
    /// a weak cost whose optimizers fail monotonicity.
    pub fn min01() -> Self {
        Self::new(
            "min01",
            Arc::new(|_, p: &DiscreteMeasure| p.mass_at(0.0, 1e-9).min(p.mass_at(1.0, 1e-9))),
        )
    }

    /// Negative variance of the conditional law; concave in `p`.
    pub fn neg_variance() -> Self {
        Self::new(
            "neg-variance",
            Arc::new(|_, p: &DiscreteMeasure| -p.variance().unwrap_or(0.0)),
        )
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "min01" => Ok(Self::min01()),
            "neg-variance" => Ok(Self::neg_variance()),
            other => Err(Error::Parse(format!(
                "unknown generic cost `{other}` (expected `min01` or `neg-variance`)"
            ))),
        }
    }
}

/// A cost specification for the solvers and checkers.
#[derive(Debug, Clone)]
pub enum CostSpec {
    Pointwise(PointwiseCost),
    Barycentric(PiecewiseLinear),
    Generic(GenericCost),
}

/// Parses a piecewise-linear function file: one `slope,intercept` per line,
/// `#` comments allowed.
pub fn parse_pieces(text: &str) -> Result<PiecewiseLinear> {
    let mut pieces = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let a = parse_field(fields.next(), lineno, "slope")?;
        let b = parse_field(fields.next(), lineno, "intercept")?;
        if fields.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: expected `slope,intercept`",
                lineno + 1
            )));
        }
        pieces.push((a, b));
    }
    PiecewiseLinear::new(pieces)
}

/// Renders a piecewise-linear function in the `slope,intercept` format.
pub fn format_pieces(theta: &PiecewiseLinear) -> String {
    let mut out = String::new();
    for &(a, b) in &theta.pieces {
        out.push_str(&format!("{a},{b}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_families() {
        let abs = PointwiseCost::by_name("abs").unwrap();
        assert_eq!(abs.eval(1.0, -2.0).unwrap(), 3.0);
        let sq = PointwiseCost::by_name("square").unwrap();
        assert_eq!(sq.eval(1.0, 3.0).unwrap(), 4.0);
        assert!(PointwiseCost::by_name("cube").is_err());
    }

    #[test]
    fn table_lookup_and_miss() {
        let t = CostTable {
            x_atoms: vec![0.0, 1.0],
            y_atoms: vec![-1.0, 2.0],
            values: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        };
        assert_eq!(t.eval(1.0, -1.0).unwrap(), 3.0);
        assert!(matches!(
            t.eval(0.5, -1.0),
            Err(Error::CostNotDefined { .. })
        ));
    }

    #[test]
    fn piecewise_linear_eval_and_min() {
        let theta = PiecewiseLinear::abs();
        assert_eq!(theta.eval(-2.0), 2.0);
        assert_eq!(theta.eval(3.0), 3.0);
        // the kink at 0 is inside the interval
        assert_eq!(theta.min_on(-1.0, 2.0), 0.0);
        assert_eq!(theta.min_on(1.0, 2.0), 1.0);
    }

    #[test]
    fn min01_matches_hand_values() {
        let c = GenericCost::min01();
        let nu = DiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(c.eval(0.0, &nu), 0.5);
        assert_eq!(c.eval(0.0, &DiscreteMeasure::dirac(0.0)), 0.0);
        assert_eq!(c.eval(0.0, &DiscreteMeasure::dirac(1.0)), 0.0);
    }

    #[test]
    fn pieces_round_trip() {
        let theta = PiecewiseLinear::new(vec![(1.0, 0.5), (-0.25, 2.0)]).unwrap();
        let text = format_pieces(&theta);
        assert_eq!(parse_pieces(&text).unwrap(), theta);
    }
}
