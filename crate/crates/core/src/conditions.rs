//! Steffensen-type ratio conditions
//!
//! ```text
//! R(s) = ∫_a^s p g / (∫_a^s p)^{1/r}
//! ```
//!
//! and the power-mean bounds on `∫ p g f` they imply for nonincreasing `f`.
//! Direction `c1` (`r ∈ (0, 1]`) asks `R(s) ≤ R(b)` on `(a, b]` and gives an
//! upper bound; `c2` (`r ≥ 1`) asks `R(s) ≥ R(b)` and gives a lower bound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::continuous::{quadrature, Cumulative, Integrand, Monotonicity, SampledFunction};
use crate::error::{bail, Error, Result};
use crate::report::{BoundKind, BoundReport, Extremum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `R(s) ≤ R(b)`, needs `r ∈ (0, 1]`.
    #[serde(rename = "c1")]
    Corollary1,
    /// `R(s) ≥ R(b)`, needs `r ≥ 1`.
    #[serde(rename = "c2")]
    Corollary2,
}

impl Direction {
    fn check_r(self, r: f64) -> Result<()> {
        if !(r.is_finite() && r > 0.0) {
            bail!(Domain, "r must be a positive real, got {r}");
        }
        match self {
            Direction::Corollary1 if r > 1.0 => bail!(Usage, "direction c1 needs r in (0, 1], got {r}"),
            Direction::Corollary2 if r < 1.0 => bail!(Usage, "direction c2 needs r >= 1, got {r}"),
            _ => Ok(()),
        }
    }

    /// Signed margin of `ratio` against `boundary`; negative means violated.
    fn margin(self, ratio: f64, boundary: f64) -> f64 {
        match self {
            Direction::Corollary1 => boundary - ratio,
            Direction::Corollary2 => ratio - boundary,
        }
    }

    fn kind(self) -> BoundKind {
        match self {
            Direction::Corollary1 => BoundKind::Upper,
            Direction::Corollary2 => BoundKind::Lower,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Corollary1 => "c1",
            Direction::Corollary2 => "c2",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c1" => Ok(Direction::Corollary1),
            "c2" => Ok(Direction::Corollary2),
            other => Err(Error::Parse(format!("unknown direction {other:?}, expected c1 or c2"))),
        }
    }
}

/// One evaluated grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionRow {
    pub s: f64,
    pub ratio: f64,
    pub boundary_ratio: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub r: f64,
    pub direction: Direction,
    pub grid: Vec<f64>,
    pub ratio: Vec<f64>,
    pub boundary_ratio: f64,
    pub passed: bool,
    /// Grid point with the smallest margin.
    pub worst_s: f64,
    pub worst_margin: f64,
    /// The ratio moves against the condition over the first grid points,
    /// so it may be violated between `a` and the first point.
    pub edge_growth: bool,
    pub tol_rel: f64,
}

impl ConditionReport {
    pub fn rows(&self) -> Vec<ConditionRow> {
        self.grid
            .iter()
            .zip(&self.ratio)
            .map(|(&s, &ratio)| ConditionRow {
                s,
                ratio,
                boundary_ratio: self.boundary_ratio,
                margin: self.direction.margin(ratio, self.boundary_ratio),
            })
            .collect()
    }
}

/// `∫_a^s p g / (∫_a^s p)^{1/r}`
pub fn steffensen_ratio(p: &SampledFunction, g: &SampledFunction, s: f64, r: f64, panels: usize) -> Result<f64> {
    let iv = p.interval();
    if !(iv.left < s && s <= iv.right) {
        bail!(Domain, "s = {s} outside ({}, {}]", iv.left, iv.right);
    }
    if !(r.is_finite() && r > 0.0) {
        bail!(Domain, "r must be a positive real, got {r}");
    }
    let pg = quadrature(&Integrand::product(&[p, g]), iv.left, s, panels)?;
    let mass = quadrature(&Integrand::new(p), iv.left, s, panels)?;
    Ok(pg / mass.powf(1.0 / r))
}

fn condition_grid(p: &SampledFunction, g: &SampledFunction, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        bail!(Domain, "s-grid needs at least one point");
    }
    let iv = p.interval();
    let mut pts: Vec<f64> = (1..=count)
        .map(|j| {
            if j == count {
                iv.right
            } else {
                iv.left + iv.width() * j as f64 / count as f64
            }
        })
        .collect();
    pts.extend(
        p.breakpoints()
            .iter()
            .chain(g.breakpoints())
            .copied()
            .filter(|&x| iv.left < x && x < iv.right),
    );
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// Evaluates the ratio on a uniform grid of `s_grid` points over `(a, b]`
/// (plus the breakpoints of `p` and `g`) and compares it with `R(b)`.
pub fn check_condition(
    p: &SampledFunction,
    g: &SampledFunction,
    r: f64,
    direction: Direction,
    s_grid: usize,
    panels: usize,
    tol_rel: f64,
) -> Result<ConditionReport> {
    direction.check_r(r)?;
    if !p.interval().same_as(&g.interval()) {
        bail!(Invariant, "p and g must share one interval");
    }
    if !p.is_positive() {
        bail!(Invariant, "p must be strictly positive (min {})", p.min_sample());
    }
    if !g.is_nonnegative() {
        bail!(Invariant, "g takes negative values (min {})", g.min_sample());
    }
    let grid = condition_grid(p, g, s_grid)?;
    let mass = Cumulative::new(Integrand::new(p), panels)?;
    let pg = Cumulative::new(Integrand::product(&[p, g]), panels)?;
    let ratio: Vec<f64> = grid.iter().map(|&s| pg.upto(s) / mass.upto(s).powf(1.0 / r)).collect();
    let boundary_ratio = *ratio.last().expect("grid is nonempty");

    let margins: Vec<f64> = ratio.iter().map(|&v| direction.margin(v, boundary_ratio)).collect();
    let mut worst = 0;
    for (i, &m) in margins.iter().enumerate() {
        if m < margins[worst] {
            worst = i;
        }
    }
    let slack = tol_rel * (1.0 + boundary_ratio.abs());
    let grid_ok = margins.iter().all(|&m| m >= -slack);
    let edge_growth = margins.len() >= 3 && margins[0] < margins[1] - slack && margins[1] < margins[2] - slack;

    Ok(ConditionReport {
        r,
        direction,
        boundary_ratio,
        passed: grid_ok && !edge_growth,
        worst_s: grid[worst],
        worst_margin: margins[worst],
        edge_growth,
        grid,
        ratio,
        tol_rel,
    })
}

/// `∫ p g f` against `(∫ p f^r)^{1/r} · ∫ p g / (∫ p)^{1/r}`, an upper bound
/// under `c1` and a lower bound under `c2`. `condition` must be a passed
/// report for the same `p`, `g`, `r` and direction.
pub fn corollary_bound(
    p: &SampledFunction,
    g: &SampledFunction,
    f: &SampledFunction,
    r: f64,
    direction: Direction,
    condition: &ConditionReport,
    panels: usize,
) -> Result<BoundReport> {
    direction.check_r(r)?;
    if condition.direction != direction || condition.r != r {
        bail!(
            Usage,
            "condition report is for r = {} ({}), not r = {r} ({direction})",
            condition.r,
            condition.direction
        );
    }
    if !condition.passed {
        bail!(
            Usage,
            "the {direction} condition failed at s = {} (margin {})",
            condition.worst_s,
            condition.worst_margin
        );
    }
    let iv = p.interval();
    if !iv.same_as(&g.interval()) || !iv.same_as(&f.interval()) {
        bail!(Invariant, "p, g and f must share one interval");
    }
    if condition.grid.last() != Some(&iv.right) {
        bail!(Usage, "condition report was computed on another interval");
    }
    if f.monotonicity() != Monotonicity::Nonincreasing {
        bail!(Usage, "f must be tagged nonincreasing, got {}", f.monotonicity());
    }
    if !f.is_nonnegative() {
        bail!(Invariant, "f takes negative values (min {})", f.min_sample());
    }
    let (lo, hi) = (iv.left, iv.right);
    let lhs = quadrature(&Integrand::product(&[p, g, f]), lo, hi, panels)?;
    let pfr = quadrature(&Integrand::new(p).times_pow(f, r), lo, hi, panels)?;
    let pg = quadrature(&Integrand::product(&[p, g]), lo, hi, panels)?;
    let mass = quadrature(&Integrand::new(p), lo, hi, panels)?;
    let bound = pfr.powf(1.0 / r) * pg / mass.powf(1.0 / r);
    Ok(BoundReport::new(
        direction.kind(),
        lhs,
        bound,
        Extremum::Point(hi),
        false,
        condition.tol_rel,
    ))
}
