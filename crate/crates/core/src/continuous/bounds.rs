//! Integral bounds over `s ∈ (a, b]`:
//!
//! ```text
//! ∫ p g M(f)  ≤ / ≥  sup / inf_s  M( ∫_a^b p f / ∫_a^s p ) · ∫_a^s p g
//! ```
//!
//! for nonincreasing `f`, and the mirrored form with suffix integrals `∫_s^b`
//! for nondecreasing `f`. The extremum over `s` is searched on a finite grid
//! with one round of local refinement; growth of the candidate toward the
//! open end of the range is reported as divergence instead of being chased.

use crate::curvature::{Curvature, CurvedFunction};
use crate::discrete::WeightedSequence;
use crate::error::{bail, Result};
use crate::report::{BoundKind, BoundReport, Extremum};

use super::function::{merged_points, Monotonicity, WeightedTriple};
use super::quadrature::{quadrature, Cumulative, Integrand, DEFAULT_PANELS};

/// Default number of uniform `s` points.
pub const DEFAULT_S_GRID: usize = 1024;

/// Default relative tolerance for continuous verdicts; quadrature error dominates 1e-9.
pub const DEFAULT_CONT_TOL_REL: f64 = 1e-6;

/// Extra points evaluated around the best grid point.
pub const REFINE_POINTS: usize = 10;

/// Fraction of a truncated horizon checked for residual mass.
pub const TAIL_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub enum SGrid {
    /// `count` equally spaced points; breakpoints of the triple are added.
    Uniform(usize),
    /// Exactly these points, no refinement.
    Points(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct BoundOptions {
    pub s_grid: SGrid,
    pub panels: usize,
    pub tol_rel: f64,
    /// Residual-mass threshold for truncated-infinite intervals.
    pub tail_tol: f64,
    pub refine: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            s_grid: SGrid::Uniform(DEFAULT_S_GRID),
            panels: DEFAULT_PANELS,
            tol_rel: DEFAULT_CONT_TOL_REL,
            tail_tol: 1e-6,
            refine: true,
        }
    }
}

impl BoundOptions {
    pub fn with_grid(mut self, s_grid: SGrid) -> Self {
        self.s_grid = s_grid;
        self
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self
    }

    pub fn with_tol(mut self, tol_rel: f64) -> Self {
        self.tol_rel = tol_rel;
        self
    }
}

/// Whether the bound uses prefix integrals `∫_a^s` or suffix integrals `∫_s^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Orientation {
    Prefix,
    Suffix,
}

/// `∫ p g M(f)` over the whole interval.
pub fn lhs_integral(t: &WeightedTriple, m: &CurvedFunction, panels: usize) -> Result<f64> {
    let iv = t.interval();
    let integrand = Integrand::product(&[&t.p, &t.g]).times_outer(m, &t.f);
    quadrature(&integrand, iv.left, iv.right, panels)
}

/// Shared cumulative integrals for one triple.
pub(crate) struct Candidates<'a> {
    m: &'a CurvedFunction,
    total_pf: f64,
    p: Cumulative<'a>,
    pg: Cumulative<'a>,
    orientation: Orientation,
}

impl<'a> Candidates<'a> {
    fn new(t: &'a WeightedTriple, m: &'a CurvedFunction, panels: usize, orientation: Orientation) -> Result<Self> {
        let iv = t.interval();
        let total_pf = quadrature(&Integrand::product(&[&t.p, &t.f]), iv.left, iv.right, panels)?;
        Ok(Self {
            m,
            total_pf,
            p: Cumulative::new(Integrand::new(&t.p), panels)?,
            pg: Cumulative::new(Integrand::product(&[&t.p, &t.g]), panels)?,
            orientation,
        })
    }

    fn at(&self, s: f64) -> f64 {
        let (mass, weight) = match self.orientation {
            Orientation::Prefix => (self.p.upto(s), self.pg.upto(s)),
            Orientation::Suffix => (self.p.from(s), self.pg.from(s)),
        };
        self.m.eval(self.total_pf / mass) * weight
    }
}

/// Single candidate `M(∫_a^b pf / ∫_a^s p) · ∫_a^s pg` for `s ∈ (a, b]`.
pub fn candidate_continuous(t: &WeightedTriple, m: &CurvedFunction, s: f64, panels: usize) -> Result<f64> {
    let iv = t.interval();
    if !(iv.left < s && s <= iv.right) {
        bail!(Domain, "s = {s} outside ({}, {}]", iv.left, iv.right);
    }
    Ok(Candidates::new(t, m, panels, Orientation::Prefix)?.at(s))
}

/// Same with suffix integrals, `s ∈ [a, b)`.
pub fn candidate_suffix(t: &WeightedTriple, m: &CurvedFunction, s: f64, panels: usize) -> Result<f64> {
    let iv = t.interval();
    if !(iv.left <= s && s < iv.right) {
        bail!(Domain, "s = {s} outside [{}, {})", iv.left, iv.right);
    }
    Ok(Candidates::new(t, m, panels, Orientation::Suffix)?.at(s))
}

fn search_points(t: &WeightedTriple, grid: &SGrid, orientation: Orientation) -> Result<Vec<f64>> {
    let iv = t.interval();
    let valid = |s: f64| match orientation {
        Orientation::Prefix => iv.left < s && s <= iv.right,
        Orientation::Suffix => iv.left <= s && s < iv.right,
    };
    let pts = match grid {
        SGrid::Uniform(n) => {
            if *n == 0 {
                bail!(Domain, "s-grid needs at least one point");
            }
            let n = *n;
            let uniform: Vec<f64> = match orientation {
                Orientation::Prefix => (1..=n)
                    .map(|j| {
                        if j == n {
                            iv.right
                        } else {
                            iv.left + iv.width() * j as f64 / n as f64
                        }
                    })
                    .collect(),
                Orientation::Suffix => (0..n).map(|j| iv.left + iv.width() * j as f64 / n as f64).collect(),
            };
            let breaks = t.breakpoints();
            merged_points([uniform.as_slice(), breaks.as_slice()])
                .into_iter()
                .filter(|&s| valid(s))
                .collect()
        }
        SGrid::Points(points) => {
            if points.is_empty() {
                bail!(Domain, "s-grid needs at least one point");
            }
            if let Some(bad) = points.iter().find(|&&s| !valid(s)) {
                bail!(Domain, "s = {bad} outside the admissible range");
            }
            merged_points([points.as_slice()])
        }
    };
    Ok(pts)
}

fn theorem_bound(
    t: &WeightedTriple,
    m: &CurvedFunction,
    opts: &BoundOptions,
    orientation: Orientation,
) -> Result<BoundReport> {
    let kind = match m.curvature() {
        Curvature::Convex => BoundKind::Upper,
        Curvature::Concave => BoundKind::Lower,
    };
    let iv = t.interval();
    let cands = Candidates::new(t, m, opts.panels, orientation)?;
    let points = search_points(t, &opts.s_grid, orientation)?;
    let values: Vec<f64> = points.iter().map(|&s| cands.at(s)).collect();

    let mut best = 0;
    for i in 1..values.len() {
        if kind.improves(values[i], values[best]) {
            best = i;
        }
    }

    // candidates still improving toward the open end of the range
    let n = values.len();
    let mut divergent = n >= 3
        && match orientation {
            Orientation::Prefix => {
                best == 0 && kind.improves(values[0], values[1]) && kind.improves(values[1], values[2])
            }
            Orientation::Suffix => {
                best == n - 1
                    && kind.improves(values[n - 1], values[n - 2])
                    && kind.improves(values[n - 2], values[n - 3])
            }
        };

    let (mut best_s, mut best_v) = (points[best], values[best]);
    if opts.refine && matches!(opts.s_grid, SGrid::Uniform(_)) {
        let lo = if best > 0 { points[best - 1] } else { iv.left };
        let hi = if best + 1 < n { points[best + 1] } else { iv.right };
        for k in 1..=REFINE_POINTS {
            let s = lo + (hi - lo) * k as f64 / (REFINE_POINTS + 1) as f64;
            let admissible = match orientation {
                Orientation::Prefix => iv.left < s && s <= iv.right,
                Orientation::Suffix => iv.left <= s && s < iv.right,
            };
            if !admissible {
                continue;
            }
            let v = cands.at(s);
            if kind.improves(v, best_v) {
                best_s = s;
                best_v = v;
            }
        }
    }

    if iv.truncated {
        let tail_lo = iv.right - TAIL_FRACTION * iv.width();
        let pf = quadrature(&Integrand::product(&[&t.p, &t.f]), tail_lo, iv.right, opts.panels)?;
        let pg = quadrature(&Integrand::product(&[&t.p, &t.g]), tail_lo, iv.right, opts.panels)?;
        if pf.abs() >= opts.tail_tol || pg.abs() >= opts.tail_tol {
            divergent = true;
        }
    }

    let lhs = lhs_integral(t, m, opts.panels)?;
    Ok(BoundReport::new(
        kind,
        lhs,
        best_v,
        Extremum::Point(best_s),
        divergent,
        opts.tol_rel,
    ))
}

fn require(t: &WeightedTriple, m: &CurvedFunction, curvature: Option<Curvature>, mono: Monotonicity) -> Result<()> {
    if let Some(c) = curvature {
        if m.curvature() != c {
            bail!(
                Usage,
                "this bound needs a {c} outer function, {} is {}",
                m.label(),
                m.curvature()
            );
        }
    }
    if t.f.monotonicity() != mono {
        bail!(Usage, "this bound needs f tagged {mono}, got {}", t.f.monotonicity());
    }
    Ok(())
}

/// Supremum form for convex `M` and nonincreasing `f`.
pub fn upper_bound_cont(t: &WeightedTriple, m: &CurvedFunction, opts: &BoundOptions) -> Result<BoundReport> {
    require(t, m, Some(Curvature::Convex), Monotonicity::Nonincreasing)?;
    theorem_bound(t, m, opts, Orientation::Prefix)
}

/// Infimum form for concave `M` and nonincreasing `f`.
pub fn lower_bound_cont(t: &WeightedTriple, m: &CurvedFunction, opts: &BoundOptions) -> Result<BoundReport> {
    require(t, m, Some(Curvature::Concave), Monotonicity::Nonincreasing)?;
    theorem_bound(t, m, opts, Orientation::Prefix)
}

/// Suffix-integral form for nondecreasing `f`; supremum for convex `M`,
/// infimum for concave `M`.
pub fn bound_nondecreasing(t: &WeightedTriple, m: &CurvedFunction, opts: &BoundOptions) -> Result<BoundReport> {
    require(t, m, None, Monotonicity::Nondecreasing)?;
    theorem_bound(t, m, opts, Orientation::Suffix)
}

/// Dispatches on the tag of `f` and the curvature of `M`.
pub fn bound_for_triple(t: &WeightedTriple, m: &CurvedFunction, opts: &BoundOptions) -> Result<BoundReport> {
    match (t.f.monotonicity(), m.curvature()) {
        (Monotonicity::Nondecreasing, _) => bound_nondecreasing(t, m, opts),
        (_, Curvature::Convex) => upper_bound_cont(t, m, opts),
        (_, Curvature::Concave) => lower_bound_cont(t, m, opts),
    }
}

/// The weighted sequence induced by a partition `a = l_0 < … < l_m = b` on
/// which `f` is constant: `p_k = ∫ p`, `b_k = ∫ p g / p_k`, `a_k = f` on piece `k`.
pub fn induced_sequence(t: &WeightedTriple, partition: &[f64], panels: usize) -> Result<WeightedSequence> {
    let iv = t.interval();
    if partition.len() < 2 || partition[0] != iv.left || partition[partition.len() - 1] != iv.right {
        bail!(Domain, "partition must run from {} to {}", iv.left, iv.right);
    }
    let p_int = Integrand::new(&t.p);
    let pg_int = Integrand::product(&[&t.p, &t.g]);
    let mut a = Vec::with_capacity(partition.len() - 1);
    let mut b = Vec::with_capacity(partition.len() - 1);
    let mut p = Vec::with_capacity(partition.len() - 1);
    for w in partition.windows(2) {
        let pk = quadrature(&p_int, w[0], w[1], panels)?;
        let bk = quadrature(&pg_int, w[0], w[1], panels)? / pk;
        a.push(t.f.eval(w[0]));
        b.push(bk);
        p.push(pk);
    }
    WeightedSequence::new(a, b, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::function::{Interval, SampledFunction};
    use crate::curvature::make_power;

    fn unit_triple(f: SampledFunction, g: SampledFunction) -> WeightedTriple {
        let p = SampledFunction::constant(Interval::unit(), 1.0).unwrap();
        WeightedTriple::new(f, g, p).unwrap()
    }

    fn golden() -> WeightedTriple {
        let iv = Interval::unit();
        unit_triple(
            SampledFunction::linear_decreasing(iv).unwrap(),
            SampledFunction::linear_increasing(iv).unwrap(),
        )
    }

    const FINE: usize = 1 << 16;

    #[test]
    fn lhs_examples() {
        let m = make_power(2.0).unwrap();
        let v = lhs_integral(&golden(), &m, FINE).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-8);

        let iv = Interval::unit();
        let c = 0.7;
        let t = unit_triple(
            SampledFunction::constant(iv, c).unwrap(),
            SampledFunction::linear_increasing(iv).unwrap(),
        );
        let v = lhs_integral(&t, &m, FINE).unwrap();
        assert!((v - m.eval(c) * 0.5).abs() < 1e-12);

        let t = unit_triple(
            SampledFunction::constant(iv, 0.0).unwrap(),
            SampledFunction::linear_increasing(iv).unwrap(),
        );
        assert_eq!(lhs_integral(&t, &m, 64).unwrap(), 0.0);
    }

    #[test]
    fn golden_candidate_is_constant() {
        let m = make_power(2.0).unwrap();
        let t = golden();
        for s in [1e-3, 0.1, 0.333, 0.5, 0.9999, 1.0] {
            let c = candidate_continuous(&t, &m, s, FINE).unwrap();
            assert!((c - 0.125).abs() < 1e-8, "s = {s}: {c}");
        }
        assert!(candidate_continuous(&t, &m, 0.0, FINE).is_err());
        assert!(candidate_continuous(&t, &m, 1.5, FINE).is_err());
    }

    #[test]
    fn zero_weight_candidates_vanish() {
        let iv = Interval::unit();
        let t = unit_triple(
            SampledFunction::linear_decreasing(iv).unwrap(),
            SampledFunction::constant(iv, 0.0).unwrap(),
        );
        let m = make_power(2.0).unwrap();
        for s in [0.2, 1.0] {
            assert_eq!(candidate_continuous(&t, &m, s, 256).unwrap(), 0.0);
        }
        let r = lower_bound_cont(&t, &make_power(0.5).unwrap(), &BoundOptions::default()).unwrap();
        assert_eq!((r.lhs, r.bound), (0.0, 0.0));
        let r = upper_bound_cont(&t, &m, &BoundOptions::default()).unwrap();
        assert_eq!((r.lhs, r.bound), (0.0, 0.0));
    }

    #[test]
    fn golden_upper_bound() {
        let m = make_power(2.0).unwrap();
        let opts = BoundOptions::default().with_panels(FINE);
        let r = upper_bound_cont(&golden(), &m, &opts).unwrap();
        assert!((r.lhs - 1.0 / 12.0).abs() < 1e-8);
        assert!((r.bound - 0.125).abs() < 1e-8);
        assert!(r.holds && !r.divergent);
    }

    #[test]
    fn divergence_is_flagged() {
        let iv = Interval::unit();
        let t = unit_triple(
            SampledFunction::linear_decreasing(iv).unwrap(),
            SampledFunction::constant(iv, 1.0).unwrap(),
        );
        let m = make_power(2.0).unwrap();
        let r = upper_bound_cont(&t, &m, &BoundOptions::default()).unwrap();
        assert!(r.divergent);
        assert!(r.holds);
        // 0.25 / s at the smallest grid point
        assert!(r.bound >= 0.25 * 1024.0 * (1.0 - 1e-9));
    }

    #[test]
    fn constant_f_last_candidate_matches_lhs() {
        let iv = Interval::unit();
        let g = SampledFunction::from_fn(iv, "g", Monotonicity::None, |x| 1.0 + (3.0 * x).sin().abs()).unwrap();
        let t = unit_triple(SampledFunction::constant(iv, 1.3).unwrap(), g);
        let m = make_power(2.0).unwrap();
        let lhs = lhs_integral(&t, &m, FINE).unwrap();
        let last = candidate_continuous(&t, &m, 1.0, FINE).unwrap();
        assert!((lhs - last).abs() < 1e-12 * lhs);
        let r = upper_bound_cont(&t, &m, &BoundOptions::default().with_panels(FINE)).unwrap();
        assert!(r.holds);
        let sqrt = make_power(0.5).unwrap();
        let r = lower_bound_cont(&t, &sqrt, &BoundOptions::default().with_panels(FINE)).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn concave_golden() {
        let sqrt = make_power(0.5).unwrap();
        let r = lower_bound_cont(&golden(), &sqrt, &BoundOptions::default().with_panels(FINE)).unwrap();
        assert!((r.lhs - 4.0 / 15.0).abs() < 1e-7, "{}", r.lhs);
        // (1/2) sqrt(1/2) s^{3/2} at the smallest point reached
        let Extremum::Point(s) = r.extremal_s else { panic!() };
        let expected = 0.5 * 0.5f64.sqrt() * s.powf(1.5);
        assert!((r.bound - expected).abs() < 1e-9);
        assert!(s <= 1.0 / 1024.0);
        assert!(r.holds);
    }

    #[test]
    fn mirrored_golden() {
        let iv = Interval::unit();
        let f = SampledFunction::linear_increasing(iv).unwrap();
        let g = SampledFunction::linear_decreasing(iv).unwrap();
        let t = unit_triple(f, g);
        let m = make_power(2.0).unwrap();
        let r = bound_nondecreasing(&t, &m, &BoundOptions::default().with_panels(FINE)).unwrap();
        assert!((r.lhs - 1.0 / 12.0).abs() < 1e-8);
        assert!((r.bound - 0.125).abs() < 1e-8);
        assert!(r.holds);
        assert!(upper_bound_cont(&t, &m, &BoundOptions::default()).is_err());
    }

    #[test]
    fn mirrored_constant_first_candidate() {
        let iv = Interval::unit();
        let f = SampledFunction::constant(iv, 2.0)
            .unwrap()
            .retag(Monotonicity::Nondecreasing)
            .unwrap();
        let t = unit_triple(f, SampledFunction::linear_decreasing(iv).unwrap());
        let m = make_power(3.0).unwrap();
        let lhs = lhs_integral(&t, &m, FINE).unwrap();
        let first = candidate_suffix(&t, &m, 0.0, FINE).unwrap();
        assert!((lhs - first).abs() < 1e-12 * lhs);
    }

    #[test]
    fn usage_errors() {
        let t = golden();
        let sqrt = make_power(0.5).unwrap();
        let sq = make_power(2.0).unwrap();
        assert!(matches!(
            upper_bound_cont(&t, &sqrt, &BoundOptions::default()),
            Err(crate::Error::Usage(_))
        ));
        assert!(matches!(
            lower_bound_cont(&t, &sq, &BoundOptions::default()),
            Err(crate::Error::Usage(_))
        ));
        assert!(matches!(
            bound_nondecreasing(&t, &sq, &BoundOptions::default()),
            Err(crate::Error::Usage(_))
        ));
        let bad = BoundOptions::default().with_grid(SGrid::Points(vec![0.0, 0.5]));
        assert!(upper_bound_cont(&t, &sq, &bad).is_err());
    }

    #[test]
    fn truncated_horizon_tail_check() {
        let m = make_power(2.0).unwrap();
        let short = Interval::truncated_infinite(0.0, 5.0).unwrap();
        let long = Interval::truncated_infinite(0.0, 60.0).unwrap();
        let build = |iv: Interval| {
            let f = SampledFunction::from_fn(iv, "exp", Monotonicity::Nonincreasing, |x| (-x).exp()).unwrap();
            // g vanishing to second order at a keeps the candidate small as s -> a
            let g = SampledFunction::from_fn(iv, "g", Monotonicity::None, |x| x * x * (-0.5 * x).exp()).unwrap();
            let p = SampledFunction::constant(iv, 1.0).unwrap();
            WeightedTriple::new(f, g, p).unwrap()
        };
        let r = upper_bound_cont(&build(short), &m, &BoundOptions::default()).unwrap();
        assert!(r.divergent, "5 is too short a horizon for x^2 e^(-x/2)");
        let r = upper_bound_cont(&build(long), &m, &BoundOptions::default()).unwrap();
        assert!(!r.divergent);
        assert!(r.holds);
    }

    #[test]
    fn induced_sequence_of_steps() {
        let iv = Interval::unit();
        let f = SampledFunction::steps(iv, &[0.25, 0.5], &[3.0, 2.0, 1.0], Monotonicity::Nonincreasing).unwrap();
        let g = SampledFunction::steps(iv, &[0.25, 0.5], &[1.0, 0.0, 4.0], Monotonicity::None).unwrap();
        let p = SampledFunction::steps(iv, &[0.25, 0.5], &[2.0, 1.0, 1.0], Monotonicity::None).unwrap();
        let t = WeightedTriple::new(f, g, p).unwrap();
        let seq = induced_sequence(&t, &[0.0, 0.25, 0.5, 1.0], 64).unwrap();
        assert_eq!(seq.a(), &[3.0, 2.0, 1.0]);
        assert_eq!(seq.p(), &[0.5, 0.25, 0.5]);
        assert_eq!(seq.b(), &[1.0, 0.0, 4.0]);
    }
}
