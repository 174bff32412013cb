//! Outer functions `M: [0, ∞) → ℝ` with `M(0) = 0` and a declared curvature.
//!
//! A [`CurvedFunction`] is an evaluation closure plus a curvature tag. The tag
//! is a claim made at construction; [`check_curvature`] samples midpoint
//! convexity to catch mislabelled functions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};

/// Absolute tolerance on `M(0) = 0`.
pub const ORIGIN_TOL: f64 = 1e-12;

/// Default right end of the curvature sampling grid.
pub const DEFAULT_T_MAX: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Convex,
    Concave,
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curvature::Convex => f.write_str("convex"),
            Curvature::Concave => f.write_str("concave"),
        }
    }
}

type EvalFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct CurvedFunction {
    eval: Arc<EvalFn>,
    curvature: Curvature,
    label: String,
}

impl fmt::Debug for CurvedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvedFunction")
            .field("label", &self.label)
            .field("curvature", &self.curvature)
            .finish()
    }
}

impl CurvedFunction {
    /// Wraps an arbitrary closure. Rejects closures with `M(0) != 0`.
    pub fn new<F>(label: impl Into<String>, curvature: Curvature, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        let at_origin = eval(0.0);
        if !(at_origin.abs() <= ORIGIN_TOL) {
            bail!(Domain, "{label}: M(0) = {at_origin}, expected 0");
        }
        Ok(Self {
            eval: Arc::new(eval),
            curvature,
            label,
        })
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_convex(&self) -> bool {
        self.curvature == Curvature::Convex
    }

    /// Evaluates `M(t)`.
    ///
    /// Panics when `t` is negative or NaN; every argument produced by the
    /// engine is a nonnegative combination of validated inputs, so reaching
    /// that branch is a bug. Use [`CurvedFunction::try_eval`] for untrusted input.
    pub fn eval(&self, t: f64) -> f64 {
        match self.try_eval(t) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn try_eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            bail!(Domain, "{}: evaluated at t = {t}, domain is [0, inf)", self.label);
        }
        Ok((self.eval)(t))
    }

    /// Same function, different tag. Used to build deliberately mislabelled
    /// functions for the curvature checker and control campaigns.
    pub fn retagged(&self, curvature: Curvature) -> Self {
        Self {
            curvature,
            ..self.clone()
        }
    }

    /// Parses a builtin family descriptor: `power:<e>` or
    /// `plin:<slope,...>@<breakpoint,...>`.
    pub fn parse(descriptor: &str) -> Result<Self> {
        let (family, params) = descriptor
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("outer function {descriptor:?}: expected <family>:<params>")))?;
        match family.trim() {
            "power" => make_power(parse_real(params)?),
            "plin" => {
                let (slopes, breaks) = match params.split_once('@') {
                    Some((s, b)) => (parse_list(s)?, parse_list(b)?),
                    None => {
                        let slopes = parse_list(params)?;
                        if slopes.len() != 1 {
                            bail!(Parse, "plin with several slopes needs @<breakpoints>");
                        }
                        (slopes, vec![0.0])
                    }
                };
                make_piecewise_linear(&slopes, &breaks)
            }
            other => bail!(Parse, "unknown outer function family {other:?}"),
        }
    }
}

impl FromStr for CurvedFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_real).collect()
}

/// `M(t) = t^exponent`, tagged convex for `exponent >= 1` and concave otherwise.
pub fn make_power(exponent: f64) -> Result<CurvedFunction> {
    if !(exponent > 0.0 && exponent.is_finite()) {
        bail!(Domain, "power exponent must be positive, got {exponent}");
    }
    let curvature = if exponent >= 1.0 {
        Curvature::Convex
    } else {
        Curvature::Concave
    };
    let label = format!("power:{exponent}");
    if exponent == 1.0 {
        CurvedFunction::new(label, curvature, |t| t)
    } else if exponent == 2.0 {
        CurvedFunction::new(label, curvature, |t| t * t)
    } else if exponent == 0.5 {
        CurvedFunction::new(label, curvature, f64::sqrt)
    } else {
        CurvedFunction::new(label, curvature, move |t| t.powf(exponent))
    }
}

/// Continuous piecewise-linear function through the origin.
///
/// `slopes[i]` applies on `[breakpoints[i], breakpoints[i + 1])`, the last slope
/// extends to infinity. Nondecreasing slopes give a convex function,
/// nonincreasing slopes a concave one; a single slope is tagged convex.
pub fn make_piecewise_linear(slopes: &[f64], breakpoints: &[f64]) -> Result<CurvedFunction> {
    if slopes.is_empty() {
        bail!(Domain, "piecewise-linear function needs at least one slope");
    }
    if slopes.len() != breakpoints.len() {
        bail!(Domain, "{} slopes but {} breakpoints", slopes.len(), breakpoints.len());
    }
    if slopes.iter().chain(breakpoints).any(|v| !v.is_finite()) {
        bail!(Domain, "slopes and breakpoints must be finite");
    }
    if breakpoints[0] != 0.0 {
        bail!(Domain, "first breakpoint must be 0, got {}", breakpoints[0]);
    }
    if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        bail!(Domain, "breakpoints must be strictly increasing");
    }
    let nondecreasing = slopes.windows(2).all(|w| w[0] <= w[1]);
    let nonincreasing = slopes.windows(2).all(|w| w[0] >= w[1]);
    let curvature = if nondecreasing {
        Curvature::Convex
    } else if nonincreasing {
        Curvature::Concave
    } else {
        bail!(
            Curvature,
            "slopes {slopes:?} are neither nondecreasing nor nonincreasing"
        );
    };

    // values at each breakpoint, obtained by integrating the slopes
    let mut values = Vec::with_capacity(breakpoints.len());
    values.push(0.0);
    for i in 1..breakpoints.len() {
        let v = values[i - 1] + slopes[i - 1] * (breakpoints[i] - breakpoints[i - 1]);
        values.push(v);
    }

    let label = format!("plin:{}@{}", join(slopes), join(breakpoints));
    let slopes = slopes.to_vec();
    let breakpoints = breakpoints.to_vec();
    CurvedFunction::new(label, curvature, move |t| {
        let k = breakpoints.partition_point(|&x| x <= t).saturating_sub(1);
        values[k] + slopes[k] * (t - breakpoints[k])
    })
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureViolation {
    pub x: f64,
    pub y: f64,
    /// How far the midpoint value overshoots (convex) or undershoots
    /// (concave) the chord, beyond tolerance.
    pub excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub label: String,
    pub curvature: Curvature,
    pub points: usize,
    pub pairs_checked: usize,
    pub passed: bool,
    pub violations: Vec<CurvatureViolation>,
}

/// Geometric + uniform sampling grid on `[0, t_max]`, including 0.
fn curvature_grid(points: usize, t_max: f64) -> Vec<f64> {
    let uniform = points / 2;
    let geometric = points - uniform - 1;
    let mut grid = Vec::with_capacity(points);
    grid.push(0.0);
    for i in 1..=uniform {
        grid.push(t_max * i as f64 / uniform as f64);
    }
    let lo = (t_max * 1e-6).ln();
    let hi = t_max.ln();
    for i in 0..geometric {
        let frac = if geometric > 1 {
            i as f64 / (geometric - 1) as f64
        } else {
            0.0
        };
        grid.push((lo + frac * (hi - lo)).exp());
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Samples midpoint convexity of `m` over all grid pairs on `[0, 1e3]`.
pub fn check_curvature(m: &CurvedFunction, grid_points: usize) -> Result<CurvatureReport> {
    check_curvature_on(m, grid_points, DEFAULT_T_MAX)
}

pub fn check_curvature_on(m: &CurvedFunction, grid_points: usize, t_max: f64) -> Result<CurvatureReport> {
    if grid_points < 3 {
        bail!(Domain, "curvature check needs at least 3 grid points");
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        bail!(Domain, "t_max must be positive and finite");
    }
    let grid = curvature_grid(grid_points, t_max);
    let values: Vec<f64> = grid.iter().map(|&t| m.eval(t)).collect();
    let sign = match m.curvature() {
        Curvature::Convex => 1.0,
        Curvature::Concave => -1.0,
    };

    let mut violations = Vec::new();
    let mut pairs = 0;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            pairs += 1;
            let (x, y) = (grid[i], grid[j]);
            let mid = m.eval(0.5 * (x + y));
            let chord = 0.5 * (values[i] + values[j]);
            let tol = 1e-9 * (1.0 + values[i].abs() + values[j].abs());
            let excess = sign * (mid - chord) - tol;
            if excess > 0.0 {
                violations.push(CurvatureViolation { x, y, excess });
            }
        }
    }
    Ok(CurvatureReport {
        label: m.label().to_string(),
        curvature: m.curvature(),
        points: grid.len(),
        pairs_checked: pairs,
        passed: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_examples() {
        assert_eq!(make_power(1.0).unwrap().eval(5.0), 5.0);
        assert_eq!(make_power(2.0).unwrap().eval(1.5), 2.25);
        assert_eq!(make_power(0.5).unwrap().eval(4.0), 2.0);
        assert_eq!(make_power(1.0).unwrap().curvature(), Curvature::Convex);
        assert_eq!(make_power(0.3).unwrap().curvature(), Curvature::Concave);
    }

    #[test]
    fn power_rejects_nonpositive_exponent() {
        assert!(matches!(make_power(0.0), Err(Error::Domain(_))));
        assert!(matches!(make_power(-1.0), Err(Error::Domain(_))));
        assert!(matches!(make_power(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn power_vanishes_at_origin() {
        for e in [0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 7.5] {
            assert_eq!(make_power(e).unwrap().eval(0.0), 0.0);
        }
    }

    /// Direct piecewise integration of the slopes, independent of the
    /// cumulative-value table used by the implementation.
    fn integrate_slopes(slopes: &[f64], breaks: &[f64], t: f64) -> f64 {
        let mut total = 0.0;
        for (i, &s) in slopes.iter().enumerate() {
            let lo = breaks[i];
            let hi = breaks.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let overlap = (t.min(hi) - lo).max(0.0);
            total += s * overlap;
        }
        total
    }

    #[test]
    fn piecewise_linear_examples() {
        let id = make_piecewise_linear(&[1.0], &[0.0]).unwrap();
        assert_eq!(id.eval(3.0), 3.0);

        let convex = make_piecewise_linear(&[0.0, 2.0], &[0.0, 1.0]).unwrap();
        assert_eq!(convex.curvature(), Curvature::Convex);
        assert_eq!(convex.eval(2.0), integrate_slopes(&[0.0, 2.0], &[0.0, 1.0], 2.0));
        assert_eq!(convex.eval(2.0), 2.0);

        let concave = make_piecewise_linear(&[2.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(concave.curvature(), Curvature::Concave);
        assert_eq!(concave.eval(2.0), integrate_slopes(&[2.0, 0.0], &[0.0, 1.0], 2.0));
        assert_eq!(concave.eval(2.0), 2.0);
    }

    #[test]
    fn piecewise_linear_rejects_mixed_slopes() {
        let err = make_piecewise_linear(&[1.0, 3.0, 2.0], &[0.0, 1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::Curvature(_)));
    }

    #[test]
    fn piecewise_linear_rejects_bad_breakpoints() {
        assert!(make_piecewise_linear(&[1.0, 2.0], &[0.5, 1.0]).is_err());
        assert!(make_piecewise_linear(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(make_piecewise_linear(&[1.0, 2.0], &[0.0]).is_err());
        assert!(make_piecewise_linear(&[], &[]).is_err());
    }

    #[test]
    fn piecewise_linear_continuous_at_breakpoints() {
        let slopes = [0.5, 1.0, 4.0, 4.5];
        let breaks = [0.0, 0.3, 1.7, 2.0];
        let m = make_piecewise_linear(&slopes, &breaks).unwrap();
        for &x in &breaks[1..] {
            let left = m.eval(x - 1e-13);
            let right = m.eval(x);
            assert!((left - right).abs() < 1e-12, "jump at {x}: {left} vs {right}");
            assert!((right - integrate_slopes(&slopes, &breaks, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_argument_is_an_error() {
        let m = make_power(2.0).unwrap();
        assert!(matches!(m.try_eval(-1.0), Err(Error::Domain(_))));
        assert!(m.try_eval(f64::NAN).is_err());
    }

    #[test]
    #[should_panic]
    fn negative_argument_panics_in_eval() {
        make_power(2.0).unwrap().eval(-0.5);
    }

    #[test]
    fn rejects_closure_off_origin() {
        let err = CurvedFunction::new("shifted", Curvature::Convex, |t| t * t + 1.0).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn curvature_check_examples() {
        let square = make_power(2.0).unwrap();
        assert!(check_curvature(&square, 100).unwrap().passed);

        let sqrt_as_convex = make_power(0.5).unwrap().retagged(Curvature::Convex);
        let report = check_curvature(&sqrt_as_convex, 100).unwrap();
        assert!(!report.passed);
        assert!(!report.violations.is_empty());

        let linear = make_power(1.0).unwrap();
        assert!(check_curvature(&linear, 100).unwrap().passed);
        assert!(
            check_curvature(&linear.retagged(Curvature::Concave), 100)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn curvature_check_on_power_family() {
        for e in [0.25, 0.5, 1.0, 2.0, 3.0] {
            let m = make_power(e).unwrap();
            let report = check_curvature(&m, 100).unwrap();
            assert!(report.passed, "power {e}: {:?}", report.violations.first());
        }
    }

    #[test]
    fn curvature_check_needs_three_points() {
        assert!(check_curvature(&make_power(2.0).unwrap(), 2).is_err());
    }

    #[test]
    fn parses_descriptors() {
        let m: CurvedFunction = "power:2".parse().unwrap();
        assert_eq!(m.eval(3.0), 9.0);
        let m: CurvedFunction = "plin:0,2@0,1".parse().unwrap();
        assert_eq!(m.eval(2.0), 2.0);
        assert_eq!(m.curvature(), Curvature::Convex);
        let m: CurvedFunction = "plin:1".parse().unwrap();
        assert_eq!(m.eval(3.0), 3.0);
        assert!("cosh:1".parse::<CurvedFunction>().is_err());
        assert!("power".parse::<CurvedFunction>().is_err());
        assert!("power:x".parse::<CurvedFunction>().is_err());
    }
}
