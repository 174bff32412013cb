//! Step-function surrogates `f_n` of a nonincreasing `f` with
//! `|M(f) − M(f_n)| ≤ 1/n`.
//!
//! Pieces are built greedily from the left: each piece `[l_{k-1}, l_k)` is the
//! longest on which `M∘f` stays within `1/n` of its value at `l_{k-1}`, and
//! `f_n` takes the left limit of `f` at `l_k` on it.

use serde::Serialize;

use crate::curvature::CurvedFunction;
use crate::error::{bail, Result};

use super::function::{merged_points, Monotonicity, SampledFunction, Side};
use super::quadrature::{quadrature, Integrand};

/// Default number of uniform probe points used to locate piece boundaries.
pub const DEFAULT_STEP_SAMPLES: usize = 1 << 14;

#[derive(Clone, Debug, Serialize)]
pub struct StepApproximation {
    #[serde(skip)]
    pub approx: SampledFunction,
    /// `l_0 = a < l_1 < … < l_m = b`
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub level: usize,
    /// Smallest integer with `|M(f)| < n` for all `n > n0` on the probe grid.
    pub n0: usize,
    /// Realised `sup |M(f) − M(f_n)|` on the probe grid and all knots.
    pub sup_error: f64,
    pub pieces: usize,
    /// `pieces ≤ 2 n²`
    pub piece_bound_ok: bool,
}

impl StepApproximation {
    /// `∫ p g (M(f) − M(f_n))`
    pub fn weighted_gap(
        &self,
        f: &SampledFunction,
        p: &SampledFunction,
        g: &SampledFunction,
        m: &CurvedFunction,
        panels: usize,
    ) -> Result<f64> {
        let iv = f.interval();
        let exact = quadrature(
            &Integrand::product(&[p, g]).times_outer(m, f),
            iv.left,
            iv.right,
            panels,
        )?;
        let approx = quadrature(
            &Integrand::product(&[p, g]).times_outer(m, &self.approx),
            iv.left,
            iv.right,
            panels,
        )?;
        Ok(exact - approx)
    }
}

pub fn step_approximation(f: &SampledFunction, m: &CurvedFunction, level: usize) -> Result<StepApproximation> {
    step_approximation_with(f, m, level, DEFAULT_STEP_SAMPLES)
}

pub fn step_approximation_with(
    f: &SampledFunction,
    m: &CurvedFunction,
    level: usize,
    samples: usize,
) -> Result<StepApproximation> {
    if f.monotonicity() != Monotonicity::Nonincreasing {
        bail!(
            Usage,
            "step approximation needs f tagged nonincreasing, got {}",
            f.monotonicity()
        );
    }
    if samples == 0 {
        bail!(Domain, "need at least one probe panel");
    }
    let iv = f.interval();
    let uniform: Vec<f64> = (0..=samples)
        .map(|i| {
            if i == samples {
                iv.right
            } else {
                iv.left + iv.width() * i as f64 / samples as f64
            }
        })
        .collect();
    let nodes = merged_points([uniform.as_slice(), f.breakpoints()]);
    let comp = |x: f64, side: Side| m.eval(f.value(x, side));

    let sup_abs = nodes
        .iter()
        .flat_map(|&x| [comp(x, Side::Left).abs(), comp(x, Side::Right).abs()])
        .fold(0.0, f64::max);
    let n0 = sup_abs.floor() as usize;
    if level <= n0 {
        bail!(Usage, "level {level} must exceed n0 = {n0} (sup |M(f)| = {sup_abs})");
    }
    let tol = 1.0 / level as f64;

    let mut knots = vec![iv.left];
    let mut values = Vec::new();
    let mut start = iv.left;
    let mut reference = comp(start, Side::Right);
    let mut j = 1;
    loop {
        while j < nodes.len() && nodes[j] <= start {
            j += 1;
        }
        let mut boundary = None;
        while j < nodes.len() {
            let x = nodes[j];
            if (comp(x, Side::Left) - reference).abs() > tol {
                // crossing inside (prev, x): M∘f is continuous there
                let mut lo = nodes[j - 1].max(start);
                let mut hi = x;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if (comp(mid, Side::Right) - reference).abs() > tol {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                boundary = Some((hi, f.value(lo, Side::Right)));
                break;
            }
            if x < iv.right && (comp(x, Side::Right) - reference).abs() > tol {
                // jump at a node
                boundary = Some((x, f.value(x, Side::Left)));
                break;
            }
            j += 1;
        }
        match boundary {
            Some((l, v)) => {
                knots.push(l);
                values.push(v);
                start = l;
                reference = comp(l, Side::Right);
            }
            None => {
                knots.push(iv.right);
                values.push(f.value(iv.right, Side::Left));
                break;
            }
        }
    }

    let approx = SampledFunction::steps(iv, &knots[1..knots.len() - 1], &values, Monotonicity::Nonincreasing)?
        .with_label(format!("step-approx(n={level})"));

    let probe = merged_points([nodes.as_slice(), knots.as_slice()]);
    let sup_error = probe
        .iter()
        .flat_map(|&x| [Side::Left, Side::Right].map(|side| (comp(x, side) - m.eval(approx.value(x, side))).abs()))
        .fold(0.0, f64::max);

    let pieces = values.len();
    Ok(StepApproximation {
        approx,
        knots,
        values,
        level,
        n0,
        sup_error,
        pieces,
        piece_bound_ok: pieces <= 2 * level * level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::function::Interval;
    use crate::curvature::make_power;

    #[test]
    fn constant_is_one_piece() {
        let f = SampledFunction::constant(Interval::unit(), 0.4).unwrap();
        let s = step_approximation(&f, &make_power(1.0).unwrap(), 5).unwrap();
        assert_eq!(s.pieces, 1);
        assert_eq!(s.sup_error, 0.0);
    }

    #[test]
    fn linear_uniform_partition() {
        let f = SampledFunction::linear_decreasing(Interval::unit()).unwrap();
        let m = make_power(1.0).unwrap();
        let s = step_approximation(&f, &m, 10).unwrap();
        assert!(s.pieces <= 11, "{} pieces", s.pieces);
        assert!(s.sup_error <= 0.1 + 1e-12, "{}", s.sup_error);
        // oracle: pieces of width 0.1
        for (k, &l) in s.knots.iter().enumerate().take(10) {
            assert!((l - 0.1 * k as f64).abs() < 1e-9, "knot {k} = {l}");
        }
        assert!(s.piece_bound_ok);
    }

    #[test]
    fn breakpoints_align_with_jumps() {
        let iv = Interval::unit();
        let breaks = [0.2, 0.45, 0.8];
        let f = SampledFunction::steps(iv, &breaks, &[4.0, 3.0, 1.5, 0.5], Monotonicity::Nonincreasing).unwrap();
        let s = step_approximation(&f, &make_power(1.0).unwrap(), 20).unwrap();
        assert_eq!(s.knots, vec![0.0, 0.2, 0.45, 0.8, 1.0]);
        assert_eq!(s.values, vec![4.0, 3.0, 1.5, 0.5]);
        assert_eq!(s.sup_error, 0.0);
    }

    #[test]
    fn level_must_exceed_n0() {
        let f = SampledFunction::constant(Interval::unit(), 3.5).unwrap();
        let m = make_power(1.0).unwrap();
        assert!(step_approximation(&f, &m, 3).is_err());
        assert_eq!(step_approximation(&f, &m, 4).unwrap().n0, 3);
    }

    #[test]
    fn needs_nonincreasing() {
        let f = SampledFunction::linear_increasing(Interval::unit()).unwrap();
        assert!(step_approximation(&f, &make_power(1.0).unwrap(), 10).is_err());
    }

    #[test]
    fn smooth_error_bound() {
        let iv = Interval::new(0.0, 3.0).unwrap();
        let f = SampledFunction::from_fn(iv, "exp", Monotonicity::Nonincreasing, |x| 2.0 * (-x).exp()).unwrap();
        let m = make_power(2.0).unwrap();
        let s = step_approximation(&f, &m, 10).unwrap();
        assert!(s.sup_error <= 0.1 + 1e-12);
        assert!(s.piece_bound_ok);
        let values_nonincreasing = s.values.windows(2).all(|w| w[0] >= w[1]);
        assert!(values_nonincreasing);
    }
}
