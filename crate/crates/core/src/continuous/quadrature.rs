//! Composite trapezoidal quadrature on a uniform grid.
//!
//! The uniform grid is refined with the breakpoints of every factor, and
//! each sub-panel uses the right limit at its left node and the left limit
//! at its right node. Piecewise-linear integrands are therefore integrated
//! exactly and jumps cost nothing.

use crate::curvature::CurvedFunction;
use crate::error::{bail, Result};
use crate::sum::CompensatedSum;

use super::function::{merged_points, Interval, SampledFunction, Side};

/// Default panel count.
pub const DEFAULT_PANELS: usize = 1 << 14;

#[derive(Clone, Copy, Debug)]
pub enum Factor<'a> {
    Plain(&'a SampledFunction),
    /// `M(f(x))`
    Outer(&'a CurvedFunction, &'a SampledFunction),
    /// `f(x)^r`
    Power(&'a SampledFunction, f64),
}

impl Factor<'_> {
    fn function(&self) -> &SampledFunction {
        match self {
            Factor::Plain(f) | Factor::Outer(_, f) | Factor::Power(f, _) => f,
        }
    }

    fn value(&self, x: f64, side: Side) -> f64 {
        match *self {
            Factor::Plain(f) => f.value(x, side),
            Factor::Outer(m, f) => m.eval(f.value(x, side)),
            Factor::Power(f, r) => f.value(x, side).powf(r),
        }
    }
}

/// Pointwise product of factors.
#[derive(Clone, Debug)]
pub struct Integrand<'a> {
    factors: Vec<Factor<'a>>,
}

impl<'a> Integrand<'a> {
    pub fn new(f: &'a SampledFunction) -> Self {
        Self {
            factors: vec![Factor::Plain(f)],
        }
    }

    pub fn product(fs: &[&'a SampledFunction]) -> Self {
        Self {
            factors: fs.iter().map(|f| Factor::Plain(f)).collect(),
        }
    }

    pub fn times(mut self, f: &'a SampledFunction) -> Self {
        self.factors.push(Factor::Plain(f));
        self
    }

    pub fn times_outer(mut self, m: &'a CurvedFunction, f: &'a SampledFunction) -> Self {
        self.factors.push(Factor::Outer(m, f));
        self
    }

    pub fn times_pow(mut self, f: &'a SampledFunction, r: f64) -> Self {
        self.factors.push(Factor::Power(f, r));
        self
    }

    pub fn value(&self, x: f64, side: Side) -> f64 {
        self.factors.iter().map(|f| f.value(x, side)).product()
    }

    pub fn interval(&self) -> Interval {
        self.factors[0].function().interval()
    }

    fn breakpoints(&self) -> Vec<f64> {
        merged_points(self.factors.iter().map(|f| f.function().breakpoints()))
    }

    fn check_range(&self, lo: f64, hi: f64) -> Result<()> {
        if !(lo < hi) {
            bail!(Domain, "empty integration range [{lo}, {hi}]");
        }
        for f in &self.factors {
            let iv = f.function().interval();
            if lo < iv.left || hi > iv.right {
                bail!(
                    Domain,
                    "[{lo}, {hi}] is outside [{}, {}] of {}",
                    iv.left,
                    iv.right,
                    f.function().label()
                );
            }
        }
        Ok(())
    }
}

/// Uniform nodes on `[lo, hi]` merged with the breakpoints strictly inside.
fn nodes(lo: f64, hi: f64, panels: usize, breaks: &[f64]) -> Vec<f64> {
    let width = hi - lo;
    let mut xs: Vec<f64> = (0..=panels)
        .map(|i| {
            if i == panels {
                hi
            } else {
                lo + width * i as f64 / panels as f64
            }
        })
        .collect();
    xs.extend(breaks.iter().copied().filter(|&x| lo < x && x < hi));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn panel(integrand: &Integrand<'_>, u: f64, v: f64) -> f64 {
    0.5 * (v - u) * (integrand.value(u, Side::Right) + integrand.value(v, Side::Left))
}

/// `∫_lo^hi integrand` with `panels` uniform panels (plus breakpoint splits).
pub fn quadrature(integrand: &Integrand<'_>, lo: f64, hi: f64, panels: usize) -> Result<f64> {
    if panels == 0 {
        bail!(Domain, "panel count must be at least 1");
    }
    integrand.check_range(lo, hi)?;
    let xs = nodes(lo, hi, panels, &integrand.breakpoints());
    let mut acc = CompensatedSum::new();
    for w in xs.windows(2) {
        acc.add(panel(integrand, w[0], w[1]));
    }
    Ok(acc.value())
}

/// Convenience: integral of a single function over its whole interval.
pub fn integrate(f: &SampledFunction, panels: usize) -> Result<f64> {
    let iv = f.interval();
    quadrature(&Integrand::new(f), iv.left, iv.right, panels)
}

/// Running integral `s ↦ ∫_a^s integrand` over the integrand's interval.
#[derive(Clone, Debug)]
pub struct Cumulative<'a> {
    integrand: Integrand<'a>,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl<'a> Cumulative<'a> {
    pub fn new(integrand: Integrand<'a>, panels: usize) -> Result<Self> {
        if panels == 0 {
            bail!(Domain, "panel count must be at least 1");
        }
        let iv = integrand.interval();
        integrand.check_range(iv.left, iv.right)?;
        let nodes = nodes(iv.left, iv.right, panels, &integrand.breakpoints());
        let mut acc = CompensatedSum::new();
        let mut values = Vec::with_capacity(nodes.len());
        values.push(0.0);
        for w in nodes.windows(2) {
            acc.add(panel(&integrand, w[0], w[1]));
            values.push(acc.value());
        }
        Ok(Self {
            integrand,
            nodes,
            values,
        })
    }

    pub fn total(&self) -> f64 {
        *self.values.last().expect("at least two nodes")
    }

    /// `∫_a^s`, with a partial trapezoid when `s` is not a node.
    pub fn upto(&self, s: f64) -> f64 {
        let iv = self.integrand.interval();
        let s = s.clamp(iv.left, iv.right);
        let i = self.nodes.partition_point(|&x| x <= s).saturating_sub(1);
        let x = self.nodes[i];
        if s == x {
            self.values[i]
        } else {
            self.values[i] + panel(&self.integrand, x, s)
        }
    }

    /// `∫_s^b`
    pub fn from(&self, s: f64) -> f64 {
        let iv = self.integrand.interval();
        let s = s.clamp(iv.left, iv.right);
        if s == iv.left {
            return self.total();
        }
        let i = self.nodes.partition_point(|&x| x <= s).saturating_sub(1);
        let x = self.nodes[i];
        let head = if s == x { 0.0 } else { panel(&self.integrand, x, s) };
        // tail of the node sums, then subtract the partial panel [x, s]
        (self.total() - self.values[i]) - head
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::function::Monotonicity;

    #[test]
    fn constants_are_exact() {
        let iv = Interval::unit();
        let c = SampledFunction::constant(iv, 2.75).unwrap();
        for n in [1, 2, 7, 1000] {
            assert_eq!(integrate(&c, n).unwrap(), 2.75);
        }
        let zero = SampledFunction::constant(iv, 0.0).unwrap();
        assert_eq!(integrate(&zero, 16).unwrap(), 0.0);
    }

    #[test]
    fn square_against_antiderivative() {
        let sq = SampledFunction::from_fn(Interval::unit(), "x^2", Monotonicity::Nondecreasing, |x| x * x).unwrap();
        let v = integrate(&sq, 1 << 16).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn sub_range_must_lie_inside() {
        let c = SampledFunction::constant(Interval::unit(), 1.0).unwrap();
        let integrand = Integrand::new(&c);
        assert!(quadrature(&integrand, -0.5, 0.5, 10).is_err());
        assert!(quadrature(&integrand, 0.5, 0.5, 10).is_err());
        assert!(quadrature(&integrand, 0.5, 0.25, 10).is_err());
        assert!(quadrature(&integrand, 0.0, 1.0, 0).is_err());
        assert_eq!(quadrature(&integrand, 0.25, 0.5, 3).unwrap(), 0.25);
    }

    #[test]
    fn steps_integrate_exactly_off_grid() {
        let f = SampledFunction::steps(
            Interval::unit(),
            &[0.3, 0.71],
            &[5.0, 2.0, 1.0],
            Monotonicity::Nonincreasing,
        )
        .unwrap();
        let exact = 5.0 * 0.3 + 2.0 * 0.41 + 0.29;
        let v = integrate(&f, 8).unwrap();
        assert!((v - exact).abs() < 1e-14, "{v} vs {exact}");
    }

    #[test]
    fn products_and_outer_functions() {
        let iv = Interval::unit();
        let g = SampledFunction::linear_increasing(iv).unwrap();
        let f = SampledFunction::linear_decreasing(iv).unwrap();
        let one = SampledFunction::constant(iv, 1.0).unwrap();
        let m = crate::curvature::make_power(2.0).unwrap();
        let integrand = Integrand::product(&[&one, &g]).times_outer(&m, &f);
        let v = quadrature(&integrand, 0.0, 1.0, 1 << 16).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-8);
        let half = Integrand::new(&f).times_pow(&f, 1.0);
        let v = quadrature(&half, 0.0, 1.0, 1 << 16).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn cumulative_matches_direct() {
        let iv = Interval::new(0.0, 2.0).unwrap();
        let f = SampledFunction::from_fn(iv, "exp", Monotonicity::Nonincreasing, |x| (-x).exp()).unwrap();
        let cum = Cumulative::new(Integrand::new(&f), 1000).unwrap();
        for s in [0.001f64, 0.37, 1.0, 1.2345, 2.0] {
            let direct = 1.0 - (-s).exp();
            assert!((cum.upto(s) - direct).abs() < 1e-6, "s = {s}");
            assert!((cum.from(s) - (cum.total() - cum.upto(s))).abs() < 1e-14);
        }
        assert_eq!(cum.upto(0.0), 0.0);
        assert_eq!(cum.from(0.0), cum.total());
        assert_eq!(cum.from(2.0), 0.0);
    }
}
