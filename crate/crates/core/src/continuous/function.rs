use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

/// Samples used to validate monotonicity and sign tags.
pub const VALIDATION_SAMPLES: usize = 4096;

/// Slack allowed when checking monotonicity tags.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
    /// `right` is a finite horizon standing in for `+∞`.
    #[serde(default)]
    pub truncated: bool,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            bail!(Domain, "invalid interval [{left}, {right}]");
        }
        Ok(Self {
            left,
            right,
            truncated: false,
        })
    }

    /// `[left, ∞)` realised as `[left, horizon]`.
    pub fn truncated_infinite(left: f64, horizon: f64) -> Result<Self> {
        Ok(Self {
            truncated: true,
            ..Self::new(left, horizon)?
        })
    }

    pub fn unit() -> Self {
        Self {
            left: 0.0,
            right: 1.0,
            truncated: false,
        }
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left <= x && x <= self.right
    }

    pub(crate) fn same_as(&self, other: &Interval) -> bool {
        self.left == other.left && self.right == other.right && self.truncated == other.truncated
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Nonincreasing,
    Nondecreasing,
    None,
}

impl Monotonicity {
    pub fn is_monotone(self) -> bool {
        self != Monotonicity::None
    }
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Nonincreasing => "nonincreasing",
            Monotonicity::Nondecreasing => "nondecreasing",
            Monotonicity::None => "none",
        })
    }
}

/// Which one-sided value to take at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

type EvalFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Profile {
    /// Continuous closure.
    Closure(Arc<EvalFn>),
    /// `values[k]` on `[knots[k], knots[k + 1])`, last piece closed on the right.
    Steps { knots: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation between `(xs[k], ys[k])`.
    Linear { xs: Vec<f64>, ys: Vec<f64> },
}

/// A real function on an interval with declared monotonicity.
#[derive(Clone)]
pub struct SampledFunction {
    interval: Interval,
    profile: Profile,
    monotonicity: Monotonicity,
    label: String,
    min_sample: f64,
    max_sample: f64,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("label", &self.label)
            .field("interval", &self.interval)
            .field("monotonicity", &self.monotonicity)
            .finish()
    }
}

impl SampledFunction {
    fn build(interval: Interval, profile: Profile, monotonicity: Monotonicity, label: String) -> Result<Self> {
        let mut f = Self {
            interval,
            profile,
            monotonicity,
            label,
            min_sample: 0.0,
            max_sample: 0.0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn from_fn<F>(interval: Interval, label: impl Into<String>, monotonicity: Monotonicity, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(interval, Profile::Closure(Arc::new(f)), monotonicity, label.into())
    }

    /// Step function with the given interior breakpoints; `values.len()` must
    /// be `breaks.len() + 1`. Pieces are closed on the left.
    pub fn steps(interval: Interval, breaks: &[f64], values: &[f64], monotonicity: Monotonicity) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            bail!(
                Domain,
                "step function: {} values for {} breakpoints",
                values.len(),
                breaks.len()
            );
        }
        let mut knots = Vec::with_capacity(breaks.len() + 2);
        knots.push(interval.left);
        knots.extend_from_slice(breaks);
        knots.push(interval.right);
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            bail!(
                Domain,
                "step breakpoints must be strictly increasing inside the interval"
            );
        }
        let label = format!("steps({} pieces)", values.len());
        Self::build(
            interval,
            Profile::Steps {
                knots,
                values: values.to_vec(),
            },
            monotonicity,
            label,
        )
    }

    /// Piecewise-linear interpolant; `xs` must start at the left end and end
    /// at the right end of the interval.
    pub fn piecewise_linear(interval: Interval, xs: &[f64], ys: &[f64], monotonicity: Monotonicity) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            bail!(
                Domain,
                "piecewise-linear function needs matching xs/ys with at least 2 knots"
            );
        }
        if xs[0] != interval.left || xs[xs.len() - 1] != interval.right {
            bail!(Domain, "knots must span the interval exactly");
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            bail!(Domain, "knots must be strictly increasing");
        }
        let label = format!("plin({} knots)", xs.len());
        Self::build(
            interval,
            Profile::Linear {
                xs: xs.to_vec(),
                ys: ys.to_vec(),
            },
            monotonicity,
            label,
        )
    }

    /// Uniform grid of samples (first and last at the interval ends), linearly interpolated.
    pub fn uniform_samples(interval: Interval, values: &[f64], monotonicity: Monotonicity) -> Result<Self> {
        if values.len() < 2 {
            bail!(Domain, "need at least 2 samples");
        }
        let n = values.len() - 1;
        let xs: Vec<f64> = (0..=n)
            .map(|i| {
                if i == n {
                    interval.right
                } else {
                    interval.left + interval.width() * i as f64 / n as f64
                }
            })
            .collect();
        Self::piecewise_linear(interval, &xs, values, monotonicity)
    }

    /// Constant function, tagged nonincreasing (it satisfies either tag; see [`Self::retag`]).
    pub fn constant(interval: Interval, c: f64) -> Result<Self> {
        Self::build(
            interval,
            Profile::Closure(Arc::new(move |_| c)),
            Monotonicity::Nonincreasing,
            format!("const:{c}"),
        )
    }

    /// `x - left` on the interval.
    pub fn linear_increasing(interval: Interval) -> Result<Self> {
        let a = interval.left;
        Self::from_fn(interval, "lin-inc", Monotonicity::Nondecreasing, move |x| x - a)
    }

    /// `right - x` on the interval.
    pub fn linear_decreasing(interval: Interval) -> Result<Self> {
        let b = interval.right;
        Self::from_fn(interval, "lin-dec", Monotonicity::Nonincreasing, move |x| b - x)
    }

    /// Same function with another monotonicity tag, revalidated.
    pub fn retag(&self, monotonicity: Monotonicity) -> Result<Self> {
        let mut f = self.clone();
        f.monotonicity = monotonicity;
        f.validate()?;
        Ok(f)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// All validation samples are `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.min_sample >= 0.0
    }

    pub fn is_positive(&self) -> bool {
        self.min_sample > 0.0
    }

    pub fn min_sample(&self) -> f64 {
        self.min_sample
    }

    pub fn max_sample(&self) -> f64 {
        self.max_sample
    }

    /// Value at `x` (right-continuous at step breakpoints). Arguments outside
    /// the interval are clamped to it.
    pub fn eval(&self, x: f64) -> f64 {
        self.value(x, Side::Right)
    }

    pub fn value(&self, x: f64, side: Side) -> f64 {
        let x = x.clamp(self.interval.left, self.interval.right);
        match &self.profile {
            Profile::Closure(f) => f(x),
            Profile::Steps { knots, values } => {
                let k = match side {
                    Side::Right => knots.partition_point(|&k| k <= x),
                    Side::Left => knots.partition_point(|&k| k < x),
                };
                values[k.saturating_sub(1).min(values.len() - 1)]
            }
            Profile::Linear { xs, ys } => {
                let k = xs.partition_point(|&k| k <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[k - 1], xs[k]);
                let t = (x - x0) / (x1 - x0);
                ys[k - 1] + t * (ys[k] - ys[k - 1])
            }
        }
    }

    /// Interior points where the function jumps or has a kink.
    pub fn breakpoints(&self) -> &[f64] {
        match &self.profile {
            Profile::Closure(_) => &[],
            Profile::Steps { knots, .. } => &knots[1..knots.len() - 1],
            Profile::Linear { xs, .. } => &xs[1..xs.len() - 1],
        }
    }

    /// True when the function may jump at its breakpoints.
    pub fn has_jumps(&self) -> bool {
        matches!(self.profile, Profile::Steps { .. })
    }

    /// Step pieces `(knots, values)` when the function is a step function.
    pub fn step_pieces(&self) -> Option<(&[f64], &[f64])> {
        match &self.profile {
            Profile::Steps { knots, values } => Some((knots, values)),
            _ => None,
        }
    }

    /// Validation points: a uniform grid plus both sides of every breakpoint.
    fn probe_points(&self) -> Vec<(f64, Side)> {
        let iv = self.interval;
        let mut pts: Vec<(f64, Side)> = (0..=VALIDATION_SAMPLES)
            .map(|i| {
                let x = if i == VALIDATION_SAMPLES {
                    iv.right
                } else {
                    iv.left + iv.width() * i as f64 / VALIDATION_SAMPLES as f64
                };
                (x, Side::Right)
            })
            .collect();
        for &x in self.breakpoints() {
            pts.push((x, Side::Left));
            pts.push((x, Side::Right));
        }
        pts.sort_by(|a, b| {
            a.0.total_cmp(&b.0).then_with(|| match (a.1, b.1) {
                (Side::Left, Side::Right) => std::cmp::Ordering::Less,
                (Side::Right, Side::Left) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            })
        });
        pts
    }

    fn validate(&mut self) -> Result<()> {
        let mut prev: Option<f64> = None;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, side) in self.probe_points() {
            let v = self.value(x, side);
            if !v.is_finite() {
                bail!(Invariant, "{}: non-finite value {v} at x = {x}", self.label);
            }
            lo = lo.min(v);
            hi = hi.max(v);
            if let Some(u) = prev {
                let slack = MONOTONE_SLACK * (1.0 + u.abs().max(v.abs()));
                let bad = match self.monotonicity {
                    Monotonicity::Nonincreasing => v > u + slack,
                    Monotonicity::Nondecreasing => v < u - slack,
                    Monotonicity::None => false,
                };
                if bad {
                    bail!(
                        Invariant,
                        "{} is tagged {} but goes from {u} to {v} near x = {x}",
                        self.label,
                        self.monotonicity
                    );
                }
            }
            prev = Some(v);
        }
        self.min_sample = lo;
        self.max_sample = hi;
        Ok(())
    }
}

/// `(f, g, p)` on a shared interval: `f` monotone and nonnegative, `g`
/// nonnegative, `p` strictly positive.
#[derive(Clone, Debug)]
pub struct WeightedTriple {
    pub f: SampledFunction,
    pub g: SampledFunction,
    pub p: SampledFunction,
}

impl WeightedTriple {
    pub fn new(f: SampledFunction, g: SampledFunction, p: SampledFunction) -> Result<Self> {
        let iv = f.interval();
        if !iv.same_as(&g.interval()) || !iv.same_as(&p.interval()) {
            bail!(Invariant, "f, g and p must share one interval");
        }
        if !f.monotonicity().is_monotone() {
            bail!(Invariant, "f must carry a monotonicity tag");
        }
        if !f.is_nonnegative() {
            bail!(Invariant, "f takes negative values (min {})", f.min_sample());
        }
        if !g.is_nonnegative() {
            bail!(Invariant, "g takes negative values (min {})", g.min_sample());
        }
        if !p.is_positive() {
            bail!(Invariant, "p must be strictly positive (min {})", p.min_sample());
        }
        Ok(Self { f, g, p })
    }

    pub fn interval(&self) -> Interval {
        self.f.interval()
    }

    /// Sorted union of the breakpoints of `f`, `g` and `p`.
    pub fn breakpoints(&self) -> Vec<f64> {
        merged_points([self.f.breakpoints(), self.g.breakpoints(), self.p.breakpoints()])
    }
}

pub(crate) fn merged_points<'a, I: IntoIterator<Item = &'a [f64]>>(sets: I) -> Vec<f64> {
    let mut pts: Vec<f64> = sets.into_iter().flatten().copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
