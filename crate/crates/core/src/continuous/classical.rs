//! Classical Chebyshev integral inequalities and the estimates obtained by
//! combining them (and Jensen's inequality) with the integral bounds.

use serde::Serialize;

use crate::curvature::{Curvature, CurvedFunction};
use crate::error::{bail, Result};
use crate::report::holds_within;

use super::bounds::{bound_for_triple, candidate_continuous, BoundOptions};
use super::function::{Monotonicity, SampledFunction, WeightedTriple, MONOTONE_SLACK, VALIDATION_SAMPLES};
use super::quadrature::{quadrature, Integrand};

/// Direction of a two-sided comparison `lhs ⋚ rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

impl Relation {
    pub fn slack(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::AtLeast => lhs - rhs,
            Relation::AtMost => rhs - lhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtLeast => ">=",
            Relation::AtMost => "<=",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalReport {
    /// `∫ p f g`
    pub lhs: f64,
    /// `∫ p f · ∫ p g / ∫ p`
    pub rhs: f64,
    pub relation: Relation,
    pub slack: f64,
    pub holds: bool,
}

/// `∫ p f g ≥ ∫ p f ∫ p g / ∫ p` when `f`, `g` are monotone in the same
/// direction, `≤` when in opposite directions.
pub fn classical_chebyshev(
    p: &SampledFunction,
    f: &SampledFunction,
    g: &SampledFunction,
    panels: usize,
    tol_rel: f64,
) -> Result<ClassicalReport> {
    if !f.monotonicity().is_monotone() || !g.monotonicity().is_monotone() {
        bail!(Usage, "classical comparison needs monotonicity tags on both f and g");
    }
    if !p.is_nonnegative() {
        bail!(Usage, "weight p must be nonnegative");
    }
    let iv = p.interval();
    let (lo, hi) = (iv.left, iv.right);
    let lhs = quadrature(&Integrand::product(&[p, f, g]), lo, hi, panels)?;
    let pf = quadrature(&Integrand::product(&[p, f]), lo, hi, panels)?;
    let pg = quadrature(&Integrand::product(&[p, g]), lo, hi, panels)?;
    let mass = quadrature(&Integrand::new(p), lo, hi, panels)?;
    let rhs = pf * pg / mass;
    let relation = if f.monotonicity() == g.monotonicity() {
        Relation::AtLeast
    } else {
        Relation::AtMost
    };
    let slack = relation.slack(lhs, rhs);
    Ok(ClassicalReport {
        lhs,
        rhs,
        relation,
        slack,
        holds: holds_within(slack, lhs, tol_rel),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimatesReport {
    /// `∫ p g M(f)`
    pub lhs: f64,
    /// `(∫ p M(f) / ∫ p) · ∫ p g`
    pub classical_rhs: f64,
    /// `M(∫ p f / ∫ p) · ∫ p g`
    pub jensen_rhs: f64,
    /// Relation of `lhs` to `classical_rhs`, fixed by the tag of `g`.
    pub classical_relation: Relation,
    pub classical_holds: bool,
    /// `jensen_rhs ≤ classical_rhs` for convex `M`, `≥` for concave `M`.
    pub jensen_ordering_holds: bool,
    /// The extremum of the integral bound is reached at `s = b`.
    pub attained_at_b: bool,
    /// Check of `lhs` against `jensen_rhs`, only when `attained_at_b`.
    pub jensen_bound_holds: Option<bool>,
}

impl EstimatesReport {
    pub fn holds(&self) -> bool {
        self.classical_holds && self.jensen_ordering_holds && self.jensen_bound_holds.unwrap_or(true)
    }
}

fn composition_nonincreasing(f: &SampledFunction, m: &CurvedFunction) -> bool {
    let iv = f.interval();
    let mut prev = f64::INFINITY;
    for i in 0..=VALIDATION_SAMPLES {
        let x = iv.left + iv.width() * i as f64 / VALIDATION_SAMPLES as f64;
        let v = m.eval(f.eval(x.min(iv.right)));
        if prev.is_finite() && v > prev + MONOTONE_SLACK * (1.0 + prev.abs()) {
            return false;
        }
        prev = v;
    }
    true
}

/// Compares the classical estimate `(∫pM(f)/∫p)·∫pg` and the Jensen-type
/// estimate `M(∫pf/∫p)·∫pg` with each other and with the left-hand side.
pub fn derived_estimates(t: &WeightedTriple, m: &CurvedFunction, opts: &BoundOptions) -> Result<EstimatesReport> {
    if !composition_nonincreasing(&t.f, m) {
        bail!(Usage, "M(f(x)) must be nonincreasing for the classical estimate");
    }
    let classical_relation = match t.g.monotonicity() {
        Monotonicity::Nondecreasing => Relation::AtMost,
        Monotonicity::Nonincreasing => Relation::AtLeast,
        Monotonicity::None => bail!(Usage, "g must carry a monotonicity tag"),
    };
    let iv = t.interval();
    let (lo, hi, n) = (iv.left, iv.right, opts.panels);
    let lhs = quadrature(&Integrand::product(&[&t.p, &t.g]).times_outer(m, &t.f), lo, hi, n)?;
    let mass = quadrature(&Integrand::new(&t.p), lo, hi, n)?;
    let pg = quadrature(&Integrand::product(&[&t.p, &t.g]), lo, hi, n)?;
    let pmf = quadrature(&Integrand::new(&t.p).times_outer(m, &t.f), lo, hi, n)?;
    let pf = quadrature(&Integrand::product(&[&t.p, &t.f]), lo, hi, n)?;

    let classical_rhs = pmf / mass * pg;
    let jensen_rhs = m.eval(pf / mass) * pg;
    let tol = opts.tol_rel;
    let classical_holds = holds_within(classical_relation.slack(lhs, classical_rhs), lhs, tol);
    let jensen_relation = match m.curvature() {
        Curvature::Convex => Relation::AtMost,
        Curvature::Concave => Relation::AtLeast,
    };
    let jensen_ordering_holds = holds_within(jensen_relation.slack(jensen_rhs, classical_rhs), jensen_rhs, tol);

    // the Jensen-type estimate is a valid bound when the extremum sits at s = b
    let (attained_at_b, jensen_bound_holds) = if t.f.monotonicity() == Monotonicity::Nonincreasing {
        let report = bound_for_triple(t, m, opts)?;
        let at_b = candidate_continuous(t, m, hi, n)?;
        let attained = (report.bound - at_b).abs() <= tol * (1.0 + at_b.abs());
        let check = attained.then(|| {
            let relation = match m.curvature() {
                Curvature::Convex => Relation::AtMost,
                Curvature::Concave => Relation::AtLeast,
            };
            holds_within(relation.slack(lhs, jensen_rhs), lhs, tol)
        });
        (attained, check)
    } else {
        (false, None)
    };

    Ok(EstimatesReport {
        lhs,
        classical_rhs,
        jensen_rhs,
        classical_relation,
        classical_holds,
        jensen_ordering_holds,
        attained_at_b,
        jensen_bound_holds,
    })
}
