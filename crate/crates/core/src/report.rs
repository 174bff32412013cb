use std::fmt;

use serde::{Deserialize, Serialize};

/// Default relative tolerance for the `holds` verdict.
pub const DEFAULT_TOL_REL: f64 = 1e-9;

/// Which side of the inequality the bound sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// `lhs <= bound` (supremum over the candidates).
    Upper,
    /// `lhs >= bound` (infimum over the candidates).
    Lower,
}

impl BoundKind {
    pub fn slack(self, lhs: f64, bound: f64) -> f64 {
        match self {
            BoundKind::Upper => bound - lhs,
            BoundKind::Lower => lhs - bound,
        }
    }

    /// True when `candidate` is strictly better than `incumbent` for this kind.
    pub(crate) fn improves(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            BoundKind::Upper => candidate > incumbent,
            BoundKind::Lower => candidate < incumbent,
        }
    }
}

/// Location of the extremal candidate: a sequence index (1-based) or a point `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extremum {
    Index(usize),
    Point(f64),
}

impl fmt::Display for Extremum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extremum::Index(i) => write!(f, "{i}"),
            Extremum::Point(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub bound: f64,
    pub extremal_s: Extremum,
    /// `bound - lhs` for upper bounds, `lhs - bound` for lower bounds.
    pub slack: f64,
    pub holds: bool,
    /// Candidate values were still growing (or shrinking, for lower bounds)
    /// at the edge of the search range, so the true extremum may be infinite.
    pub divergent: bool,
    #[serde(skip)]
    pub kind: Option<BoundKind>,
}

impl BoundReport {
    pub fn new(kind: BoundKind, lhs: f64, bound: f64, extremal_s: Extremum, divergent: bool, tol_rel: f64) -> Self {
        let slack = kind.slack(lhs, bound);
        Self {
            lhs,
            bound,
            extremal_s,
            slack,
            holds: holds_within(slack, lhs, tol_rel),
            divergent,
            kind: Some(kind),
        }
    }

    /// Recomputes the verdict at another tolerance.
    pub fn with_tol(mut self, tol_rel: f64) -> Self {
        self.holds = holds_within(self.slack, self.lhs, tol_rel);
        self
    }
}

pub(crate) fn holds_within(slack: f64, lhs: f64, tol_rel: f64) -> bool {
    slack >= -tol_rel * (1.0 + lhs.abs())
}

/// Rounds to 12 significant digits, the precision used for all emitted numbers.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}
