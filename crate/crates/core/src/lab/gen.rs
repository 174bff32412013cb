//! Random instances satisfying (or, for control targets, violating) the
//! hypotheses of the bounds.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::continuous::{Interval, Monotonicity, SampledFunction};
use crate::curvature::{make_piecewise_linear, Curvature, CurvedFunction};
use crate::discrete::WeightedSequence;
use crate::error::Result;

/// Most pieces of a generated step function.
pub const MAX_STEP_PIECES: usize = 20;

/// Most knots of a generated piecewise-linear function.
pub const MAX_LINEAR_KNOTS: usize = 12;

/// Lower bound on generated weights, relative to the value scale.
pub const WEIGHT_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    Step,
    PiecewiseLinear,
    Smooth,
}

impl Smoothness {
    pub const ALL: [Smoothness; 3] = [Smoothness::Step, Smoothness::PiecewiseLinear, Smoothness::Smooth];

    pub fn pick<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.gen_range(0..Self::ALL.len())]
    }
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// `a` sorted nonincreasing on `[0, value_scale]`, `b` on `[0, value_scale]`,
/// `p` on `[WEIGHT_FLOOR·value_scale, value_scale]`.
pub fn gen_sequence<R: Rng + ?Sized>(rng: &mut R, m: usize, value_scale: f64) -> Result<WeightedSequence> {
    let a = sorted_desc((0..m).map(|_| rng.gen_range(0.0..=value_scale)).collect());
    let b = (0..m).map(|_| rng.gen_range(0.0..=value_scale)).collect();
    let p = (0..m)
        .map(|_| rng.gen_range(WEIGHT_FLOOR * value_scale..=value_scale))
        .collect();
    WeightedSequence::new(a, b, p)
}

/// Raw `(a, b, p)` with `a` shuffled so that it is not nonincreasing when
/// `m >= 2` (a hypothesis violation for control targets).
pub fn gen_unsorted_raw<R: Rng + ?Sized>(rng: &mut R, m: usize, value_scale: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut a: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=value_scale)).collect();
    a.shuffle(rng);
    if m >= 2 && a.windows(2).all(|w| w[0] >= w[1]) {
        a.reverse();
    }
    let b = (0..m).map(|_| rng.gen_range(0.0..=value_scale)).collect();
    let p = (0..m)
        .map(|_| rng.gen_range(WEIGHT_FLOOR * value_scale..=value_scale))
        .collect();
    (a, b, p)
}

/// Interval `[0, L]` with `L` in `[0.5, 2]`.
pub fn gen_interval<R: Rng + ?Sized>(rng: &mut R) -> Interval {
    Interval::new(0.0, rng.gen_range(0.5..=2.0)).expect("positive width")
}

/// Strictly increasing interior points, well separated from each other and the ends.
fn interior_points<R: Rng + ?Sized>(rng: &mut R, iv: Interval, count: usize) -> Vec<f64> {
    let min_gap = iv.width() * 1e-3;
    let mut pts: Vec<f64> = (0..count)
        .map(|_| iv.left + iv.width() * rng.gen_range(0.01..0.99))
        .collect();
    pts.sort_by(f64::total_cmp);
    let mut kept: Vec<f64> = Vec::with_capacity(pts.len());
    for x in pts {
        if kept.last().is_none_or(|&y| x - y > min_gap) {
            kept.push(x);
        }
    }
    kept
}

fn ordered(values: Vec<f64>, kind: Monotonicity) -> Vec<f64> {
    match kind {
        Monotonicity::Nonincreasing => sorted_desc(values),
        Monotonicity::Nondecreasing => {
            let mut v = values;
            v.sort_by(f64::total_cmp);
            v
        }
        Monotonicity::None => values,
    }
}

fn shaped<R, D>(
    rng: &mut R,
    iv: Interval,
    kind: Monotonicity,
    smoothness: Smoothness,
    draw: D,
) -> Result<SampledFunction>
where
    R: Rng + ?Sized,
    D: Fn(&mut R) -> f64,
{
    match smoothness {
        Smoothness::Step => {
            let pieces = rng.gen_range(1..=MAX_STEP_PIECES);
            let breaks = interior_points(rng, iv, pieces - 1);
            let values = ordered((0..=breaks.len()).map(|_| draw(rng)).collect(), kind);
            SampledFunction::steps(iv, &breaks, &values, kind)
        }
        Smoothness::PiecewiseLinear => {
            let knots = rng.gen_range(2..=MAX_LINEAR_KNOTS);
            let mut xs = vec![iv.left];
            xs.extend(interior_points(rng, iv, knots - 2));
            xs.push(iv.right);
            let ys = ordered((0..xs.len()).map(|_| draw(rng)).collect(), kind);
            SampledFunction::piecewise_linear(iv, &xs, &ys, kind)
        }
        Smoothness::Smooth => unreachable!("smooth shapes are built by the callers"),
    }
}

/// Mixture `Σ c_i e^{-λ_i (x - a)}` (nonincreasing) or `Σ c_i (1 - e^{-λ_i (x - a)})`
/// (nondecreasing), `c_i > 0`; for `Monotonicity::None` a sum of one term of each kind.
fn exp_mixture<R: Rng + ?Sized>(
    rng: &mut R,
    iv: Interval,
    kind: Monotonicity,
    value_scale: f64,
) -> Result<SampledFunction> {
    let terms = rng.gen_range(1..=3);
    let a = iv.left;
    let w = iv.width();
    let mut coeffs: Vec<(f64, f64, bool)> = (0..terms)
        .map(|_| {
            let c = rng.gen_range(0.05..=1.0) * value_scale / terms as f64;
            let lambda = rng.gen_range(0.1..=5.0) / w;
            (c, lambda, kind == Monotonicity::Nondecreasing)
        })
        .collect();
    if kind == Monotonicity::None {
        let c = rng.gen_range(0.05..=1.0) * value_scale;
        coeffs.push((c, rng.gen_range(0.1..=5.0) / w, true));
    }
    let label = format!("exp-mixture({} terms)", coeffs.len());
    SampledFunction::from_fn(iv, label, kind, move |x| {
        coeffs
            .iter()
            .map(|&(c, l, rising)| {
                let e = (-l * (x - a)).exp();
                if rising {
                    c * (1.0 - e)
                } else {
                    c * e
                }
            })
            .sum()
    })
}

/// Nonnegative monotone function on `iv` with values in `[0, value_scale]`.
pub fn gen_monotone_fn<R: Rng + ?Sized>(
    rng: &mut R,
    iv: Interval,
    kind: Monotonicity,
    smoothness: Smoothness,
    value_scale: f64,
) -> Result<SampledFunction> {
    debug_assert!(kind.is_monotone());
    match smoothness {
        Smoothness::Smooth => exp_mixture(rng, iv, kind, value_scale),
        _ => shaped(rng, iv, kind, smoothness, |r: &mut R| r.gen_range(0.0..=value_scale)),
    }
}

/// Nonnegative function of any shape (tagged `None`).
pub fn gen_nonnegative_fn<R: Rng + ?Sized>(
    rng: &mut R,
    iv: Interval,
    smoothness: Smoothness,
    value_scale: f64,
) -> Result<SampledFunction> {
    match smoothness {
        Smoothness::Smooth => exp_mixture(rng, iv, Monotonicity::None, value_scale),
        _ => shaped(rng, iv, Monotonicity::None, smoothness, |r: &mut R| {
            r.gen_range(0.0..=value_scale)
        }),
    }
}

/// Weight function with values in `[WEIGHT_FLOOR·value_scale, value_scale]`.
pub fn gen_weight_fn<R: Rng + ?Sized>(
    rng: &mut R,
    iv: Interval,
    smoothness: Smoothness,
    value_scale: f64,
) -> Result<SampledFunction> {
    let floor = WEIGHT_FLOOR * value_scale;
    match smoothness {
        Smoothness::Smooth => {
            let shape = exp_mixture(rng, iv, Monotonicity::None, value_scale)?;
            let top = shape.max_sample().max(f64::MIN_POSITIVE);
            let span = value_scale - floor;
            SampledFunction::from_fn(iv, "weight", Monotonicity::None, move |x| {
                floor + span * shape.eval(x) / top
            })
        }
        _ => shaped(rng, iv, Monotonicity::None, smoothness, |r: &mut R| {
            r.gen_range(floor..=value_scale)
        }),
    }
}

/// `c·((x - a)/w)^q` with `q` in `[0, 3]`: nondecreasing, vanishing at `a`
/// to order `q`, so ratio conditions with `r < 1` have a chance to hold.
pub fn gen_power_profile<R: Rng + ?Sized>(rng: &mut R, iv: Interval, value_scale: f64) -> Result<SampledFunction> {
    let q = rng.gen_range(0.0..=3.0);
    let c = rng.gen_range(0.05..=1.0) * value_scale;
    let (a, w) = (iv.left, iv.width());
    SampledFunction::from_fn(
        iv,
        format!("power-profile(q={q})"),
        Monotonicity::Nondecreasing,
        move |x| c * ((x - a) / w).max(0.0).powf(q),
    )
}

/// Random convex (`Convex`) or concave (`Concave`) piecewise-linear `M` with
/// 1 to 4 pieces, slopes in `[-2, 4]` (`[0, 4]` when `nondecreasing`) and
/// kinks in `(0, value_scale)`.
pub fn gen_plin_outer<R: Rng + ?Sized>(
    rng: &mut R,
    curvature: Curvature,
    value_scale: f64,
    nondecreasing: bool,
) -> Result<CurvedFunction> {
    let pieces = rng.gen_range(1..=4);
    let lowest = if nondecreasing { 0.0 } else { -2.0 };
    let mut slopes: Vec<f64> = (0..pieces).map(|_| rng.gen_range(lowest..=4.0)).collect();
    slopes.sort_by(f64::total_cmp);
    if curvature == Curvature::Concave {
        slopes.reverse();
    }
    let mut breaks = vec![0.0];
    let mut kinks: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.01..1.0) * value_scale).collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    breaks.extend(kinks);
    slopes.truncate(breaks.len());
    let m = make_piecewise_linear(&slopes, &breaks)?;
    // one slope (or equal slopes) is tagged convex; it is also concave
    Ok(if m.curvature() == curvature {
        m
    } else {
        m.retagged(curvature)
    })
}
