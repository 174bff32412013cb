//! Weighted sequences, the prefix-sum bound functionals, the merge reduction
//! and the truncated infinite-series variant.
//!
//! For a nonincreasing nonnegative `a`, nonnegative `b` and positive `p` the
//! candidate at index `s` is
//!
//! ```text
//! M( Σ_{k≤m} p_k a_k / Σ_{k≤s} p_k ) · Σ_{k≤s} p_k b_k
//! ```
//!
//! and `Σ p_k b_k M(a_k)` is bounded above by the largest candidate when `M`
//! is convex and below by the smallest when `M` is concave.

use serde::{Deserialize, Serialize};

use crate::curvature::{Curvature, CurvedFunction};
use crate::error::{bail, Result};
use crate::report::{BoundKind, BoundReport, Extremum, DEFAULT_TOL_REL};
use crate::sum::{compensated_sum, prefix_sums};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSequence {
    a: Vec<f64>,
    b: Vec<f64>,
    p: Vec<f64>,
}

impl WeightedSequence {
    pub fn new(a: Vec<f64>, b: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let m = a.len();
        if m == 0 {
            bail!(Invariant, "sequence must have at least one element");
        }
        if b.len() != m || p.len() != m {
            bail!(Invariant, "length mismatch: a={}, b={}, p={}", m, b.len(), p.len());
        }
        for k in 0..m {
            if !(a[k] >= 0.0 && a[k].is_finite()) {
                bail!(Invariant, "a[{}] = {} is not a finite nonnegative number", k + 1, a[k]);
            }
            if !(b[k] >= 0.0 && b[k].is_finite()) {
                bail!(Invariant, "b[{}] = {} is not a finite nonnegative number", k + 1, b[k]);
            }
            if !(p[k] > 0.0 && p[k].is_finite()) {
                bail!(Invariant, "p[{}] = {} is not a finite positive number", k + 1, p[k]);
            }
            if k > 0 && a[k] > a[k - 1] {
                bail!(
                    Invariant,
                    "a is not nonincreasing: a[{}] = {} < a[{}] = {}",
                    k,
                    a[k - 1],
                    k + 1,
                    a[k]
                );
            }
        }
        Ok(Self { a, b, p })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// `Σ p_k a_k`
    pub fn total_pa(&self) -> f64 {
        compensated_sum(self.p.iter().zip(&self.a).map(|(p, a)| p * a))
    }

    /// `Σ p_k b_k`
    pub fn total_pb(&self) -> f64 {
        compensated_sum(self.p.iter().zip(&self.b).map(|(p, b)| p * b))
    }
}

/// `Σ p_k b_k M(a_k)`, compensated, in index order.
pub fn lhs_sum(seq: &WeightedSequence, m: &CurvedFunction) -> f64 {
    compensated_sum((0..seq.len()).map(|k| seq.p[k] * seq.b[k] * m.eval(seq.a[k])))
}

/// Prefix sums shared by all candidates of one sequence.
#[derive(Clone, Debug)]
pub struct Prefix {
    total_pa: f64,
    p: Vec<f64>,
    pb: Vec<f64>,
}

impl Prefix {
    pub fn new(seq: &WeightedSequence) -> Self {
        Self {
            total_pa: seq.total_pa(),
            p: prefix_sums(seq.p.iter().copied()),
            pb: prefix_sums(seq.p.iter().zip(&seq.b).map(|(p, b)| p * b)),
        }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Candidate at the 1-based index `s`.
    pub fn candidate(&self, m: &CurvedFunction, s: usize) -> Result<f64> {
        if s == 0 || s > self.len() {
            bail!(Domain, "index s = {s} outside 1..={}", self.len());
        }
        Ok(m.eval(self.total_pa / self.p[s - 1]) * self.pb[s - 1])
    }

    /// Extremal candidate for `kind`; ties go to the smallest index.
    pub fn extremum(&self, m: &CurvedFunction, kind: BoundKind) -> (usize, f64) {
        let mut best = (1, m.eval(self.total_pa / self.p[0]) * self.pb[0]);
        for s in 2..=self.len() {
            let c = m.eval(self.total_pa / self.p[s - 1]) * self.pb[s - 1];
            if kind.improves(c, best.1) {
                best = (s, c);
            }
        }
        best
    }
}

pub fn candidate(seq: &WeightedSequence, m: &CurvedFunction, s: usize) -> Result<f64> {
    Prefix::new(seq).candidate(m, s)
}

fn require(m: &CurvedFunction, curvature: Curvature, what: &str) -> Result<()> {
    if m.curvature() != curvature {
        bail!(
            Usage,
            "{what} needs a {curvature} outer function, {} is {}",
            m.label(),
            m.curvature()
        );
    }
    Ok(())
}

fn bound(seq: &WeightedSequence, m: &CurvedFunction, kind: BoundKind, tol_rel: f64) -> BoundReport {
    let (s, value) = Prefix::new(seq).extremum(m, kind);
    BoundReport::new(kind, lhs_sum(seq, m), value, Extremum::Index(s), false, tol_rel)
}

/// Largest candidate for a convex `M`; the left-hand sum never exceeds it.
pub fn upper_bound(seq: &WeightedSequence, m: &CurvedFunction) -> Result<BoundReport> {
    require(m, Curvature::Convex, "upper bound")?;
    Ok(bound(seq, m, BoundKind::Upper, DEFAULT_TOL_REL))
}

/// Smallest candidate for a concave `M`; the left-hand sum is never below it.
pub fn lower_bound(seq: &WeightedSequence, m: &CurvedFunction) -> Result<BoundReport> {
    require(m, Curvature::Concave, "lower bound")?;
    Ok(bound(seq, m, BoundKind::Lower, DEFAULT_TOL_REL))
}

/// Upper bound for convex `M`, lower bound for concave `M`.
pub fn bound_for(seq: &WeightedSequence, m: &CurvedFunction) -> BoundReport {
    let kind = match m.curvature() {
        Curvature::Convex => BoundKind::Upper,
        Curvature::Concave => BoundKind::Lower,
    };
    bound(seq, m, kind, DEFAULT_TOL_REL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeCase {
    /// Elements 1 and 2 fused.
    FuseFirst,
    /// Elements 2 and 3 fused in `b` and `p`, `a_1` lifted.
    FuseSecond,
}

#[derive(Clone, Debug, Serialize)]
pub struct MergeOutcome {
    pub seq: WeightedSequence,
    pub case: MergeCase,
    pub x1: f64,
    pub x2: f64,
    pub h_x1: f64,
    pub h_x2: f64,
}

/// One step of the reduction: replaces two adjacent elements by one while
/// keeping `Σ p a` and `Σ p b` and not decreasing `Σ p b M(a)`.
///
/// With `c = p₁a₁ + p₂a₂` and `h(x) = p₁b₁ M(x/p₁) + p₂b₂ M((c − x)/p₂)`, the
/// convex `h` is compared at `x₁ = c·p₁/(p₁+p₂)` and `x₂ = c − p₂a₃`
/// (`a₃ = 0` when `m = 2`). The larger endpoint picks the merge; ties fuse the
/// first pair.
pub fn merge_step(seq: &WeightedSequence, m: &CurvedFunction) -> Result<MergeOutcome> {
    require(m, Curvature::Convex, "merge step")?;
    let n = seq.len();
    if n < 2 {
        bail!(Usage, "merge step needs at least two elements");
    }
    let (a, b, p) = (&seq.a, &seq.b, &seq.p);
    let c = p[0] * a[0] + p[1] * a[1];
    let alpha = [p[0] * b[0], p[1] * b[1]];
    let a3 = if n > 2 { a[2] } else { 0.0 };

    // h at x1: both arguments equal the weighted mean of a1, a2
    let fused_a = ((p[0] * a[0] + p[1] * a[1]) / (p[0] + p[1])).clamp(a[1], a[0]);
    let x1 = c * p[0] / (p[0] + p[1]);
    let h_x1 = alpha[0] * m.eval(fused_a) + alpha[1] * m.eval(fused_a);
    // h at x2: arguments (c - p2 a3)/p1 and a3
    let lifted_a = a[0] + p[1] * (a[1] - a3) / p[0];
    let x2 = c - p[1] * a3;
    let h_x2 = alpha[0] * m.eval(lifted_a) + alpha[1] * m.eval(a3);

    let (case, next) = if h_x1 >= h_x2 {
        let mut na = vec![fused_a];
        let mut nb = vec![(alpha[0] + alpha[1]) / (p[0] + p[1])];
        let mut np = vec![p[0] + p[1]];
        na.extend_from_slice(&a[2..]);
        nb.extend_from_slice(&b[2..]);
        np.extend_from_slice(&p[2..]);
        (MergeCase::FuseFirst, WeightedSequence::new(na, nb, np)?)
    } else if n == 2 {
        (MergeCase::FuseSecond, collapse_pair(seq, m, h_x2)?)
    } else {
        let p23 = p[1] + p[2];
        let mut na = vec![lifted_a, a[2]];
        let mut nb = vec![b[0], (p[1] * b[1] + p[2] * b[2]) / p23];
        let mut np = vec![p[0], p23];
        na.extend_from_slice(&a[3..]);
        nb.extend_from_slice(&b[3..]);
        np.extend_from_slice(&p[3..]);
        (MergeCase::FuseSecond, WeightedSequence::new(na, nb, np)?)
    };
    Ok(MergeOutcome {
        seq: next,
        case,
        x1,
        x2,
        h_x1,
        h_x2,
    })
}

/// Terminal step of the second kind (`m = 2`, `h(x₂) > h(x₁)`).
///
/// The second element would be fused with a zero-valued virtual third
/// element, which cannot be expressed as one element with the original
/// weight sums. Instead the single element `(A, c/A, Σpb·A/c)` is built with
/// `Σpb·M(A) = h(x₂)`: both weight sums are kept and its value equals the
/// `s = 1` candidate.
fn collapse_pair(seq: &WeightedSequence, m: &CurvedFunction, target: f64) -> Result<WeightedSequence> {
    let (a, b, p) = (&seq.a, &seq.b, &seq.p);
    let c = p[0] * a[0] + p[1] * a[1];
    let total_pb = p[0] * b[0] + p[1] * b[1];
    // c > 0 and total_pb > 0 here: otherwise h vanishes at both endpoints and
    // the tie selects the first merge.
    let gap = |t: f64| total_pb * m.eval(t) - target;
    let (mut lo, mut hi) = (0.0, c / p[0]);
    let (g_lo, g_hi) = (gap(lo), gap(hi));
    if g_hi == 0.0 {
        lo = hi;
    } else if g_lo.signum() == g_hi.signum() || g_lo == 0.0 {
        bail!(
            Usage,
            "cannot collapse ({:?}, {:?}, {:?}) under {}: no positive solution of Σpb·M(A) = {target}",
            a,
            b,
            p,
            m.label()
        );
    } else {
        let rising = g_hi > 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (gap(mid) > 0.0) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if gap(hi).abs() < gap(lo).abs() {
            lo = hi;
        }
    }
    let value = lo;
    let weight = c / value;
    WeightedSequence::new(vec![value], vec![total_pb / weight], vec![weight])
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainStage {
    pub seq: WeightedSequence,
    pub lhs: f64,
    pub bound: f64,
    pub extremal_s: usize,
    /// Merge that produced this stage; `None` for the input.
    pub case: Option<MergeCase>,
    /// `lhs` did not decrease relative to the previous stage (within tolerance).
    pub lhs_nondecreasing: bool,
    /// `bound` did not increase relative to the previous stage (within tolerance).
    pub bound_nonincreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Chain {
    pub stages: Vec<ChainStage>,
}

impl Chain {
    pub fn laws_hold(&self) -> bool {
        self.stages.iter().all(|s| s.lhs_nondecreasing && s.bound_nonincreasing)
    }

    pub fn lhs_values(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.lhs).collect()
    }
}

/// Iterates [`merge_step`] down to a single element, recording `lhs` and the
/// upper bound of every stage.
pub fn reduce_chain(seq: &WeightedSequence, m: &CurvedFunction) -> Result<Chain> {
    require(m, Curvature::Convex, "reduction chain")?;
    let tol = |x: f64| DEFAULT_TOL_REL * (1.0 + x.abs());
    let first = bound(seq, m, BoundKind::Upper, DEFAULT_TOL_REL);
    let mut stages = vec![ChainStage {
        seq: seq.clone(),
        lhs: first.lhs,
        bound: first.bound,
        extremal_s: index_of(first.extremal_s),
        case: None,
        lhs_nondecreasing: true,
        bound_nonincreasing: true,
    }];
    while stages.last().is_some_and(|s| s.seq.len() > 1) {
        let prev = stages.last().expect("non-empty chain");
        let step = merge_step(&prev.seq, m)?;
        let report = bound(&step.seq, m, BoundKind::Upper, DEFAULT_TOL_REL);
        let stage = ChainStage {
            lhs_nondecreasing: prev.lhs <= report.lhs + tol(report.lhs),
            bound_nonincreasing: report.bound <= prev.bound + tol(prev.bound),
            seq: step.seq,
            lhs: report.lhs,
            bound: report.bound,
            extremal_s: index_of(report.extremal_s),
            case: Some(step.case),
        };
        stages.push(stage);
    }
    Ok(Chain { stages })
}

fn index_of(e: Extremum) -> usize {
    match e {
        Extremum::Index(i) => i,
        Extremum::Point(_) => unreachable!("discrete bounds report indices"),
    }
}

/// Consecutive sub-tolerance terms required before a series is considered converged.
pub const TAIL_RUN: usize = 3;

/// Bound for an infinite sequence, evaluated on a prefix.
///
/// Terms are consumed until both `p_k b_k |M(a_k)|` and `p_k a_k` stay below
/// `tail_tol` for [`TAIL_RUN`] consecutive terms, the stream ends, or
/// `max_terms` have been read. In the last case the report is marked divergent.
/// Dispatches to the supremum for convex `M` and the infimum for concave `M`.
pub fn truncated_series_bound<I>(stream: I, m: &CurvedFunction, tail_tol: f64, max_terms: usize) -> Result<BoundReport>
where
    I: IntoIterator<Item = (f64, f64, f64)>,
{
    if !(tail_tol > 0.0) {
        bail!(Domain, "tail tolerance must be positive");
    }
    if max_terms == 0 {
        bail!(Domain, "max_terms must be at least 1");
    }
    let (mut a, mut b, mut p) = (Vec::new(), Vec::new(), Vec::new());
    let mut quiet = 0;
    let mut converged = false;
    let mut exhausted = true;
    for (ak, bk, pk) in stream {
        if a.len() == max_terms {
            exhausted = false;
            break;
        }
        if let Some(&prev) = a.last() {
            if ak > prev {
                bail!(Invariant, "stream term {} has a = {ak} > previous {prev}", a.len() + 1);
            }
        }
        let increment = (pk * bk * m.try_eval(ak)?).abs();
        a.push(ak);
        b.push(bk);
        p.push(pk);
        if increment < tail_tol && pk * ak < tail_tol {
            quiet += 1;
            if quiet >= TAIL_RUN {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if a.is_empty() {
        bail!(Domain, "empty series");
    }
    let seq = WeightedSequence::new(a, b, p)?;
    let mut report = bound_for(&seq, m);
    report.divergent = !converged && !exhausted;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{make_piecewise_linear, make_power};

    fn seq(a: &[f64], b: &[f64], p: &[f64]) -> WeightedSequence {
        WeightedSequence::new(a.to_vec(), b.to_vec(), p.to_vec()).unwrap()
    }

    fn square() -> CurvedFunction {
        make_power(2.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(WeightedSequence::new(vec![], vec![], vec![]).is_err());
        assert!(WeightedSequence::new(vec![1.0, 2.0], vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(WeightedSequence::new(vec![1.0], vec![1.0], vec![0.0]).is_err());
        assert!(WeightedSequence::new(vec![1.0], vec![-1.0], vec![1.0]).is_err());
        assert!(WeightedSequence::new(vec![-1.0], vec![1.0], vec![1.0]).is_err());
        assert!(WeightedSequence::new(vec![1.0], vec![1.0, 2.0], vec![1.0]).is_err());
        // ties and zero weights b are fine
        assert!(WeightedSequence::new(vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn lhs_examples() {
        assert_eq!(lhs_sum(&seq(&[2.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]), &square()), 5.0);
        assert_eq!(lhs_sum(&seq(&[1.0], &[3.0], &[2.0]), &make_power(1.0).unwrap()), 6.0);
        assert_eq!(
            lhs_sum(&seq(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]), &square()),
            0.0
        );
    }

    #[test]
    fn candidate_examples() {
        let s = seq(&[2.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]);
        assert_eq!(candidate(&s, &square(), 1).unwrap(), 9.0);
        assert_eq!(candidate(&s, &square(), 2).unwrap(), 4.5);
        assert!(candidate(&s, &square(), 0).is_err());
        assert!(candidate(&s, &square(), 3).is_err());

        let c = 1.7;
        let s = seq(&[c, c, c], &[0.5, 2.0, 1.0], &[0.3, 1.0, 2.5]);
        let expected = square().eval(c) * s.total_pb();
        let got = candidate(&s, &square(), 3).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn upper_bound_examples() {
        let r = upper_bound(&seq(&[2.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]), &square()).unwrap();
        assert_eq!((r.lhs, r.bound, r.extremal_s), (5.0, 9.0, Extremum::Index(1)));
        assert!(r.holds && !r.divergent);
        assert_eq!(r.slack, 4.0);

        let r = upper_bound(&seq(&[1.0], &[3.0], &[2.0]), &make_power(1.0).unwrap()).unwrap();
        assert_eq!((r.lhs, r.bound), (6.0, 6.0));
        assert!(r.holds);
    }

    #[test]
    fn bounds_check_curvature() {
        let s = seq(&[2.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]);
        assert!(upper_bound(&s, &make_power(0.5).unwrap()).is_err());
        assert!(lower_bound(&s, &square()).is_err());
        assert!(merge_step(&s, &make_power(0.5).unwrap()).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let sqrt = make_power(0.5).unwrap();
        let r = lower_bound(&seq(&[2.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]), &sqrt).unwrap();
        assert!((r.lhs - (2f64.sqrt() + 1.0)).abs() < 1e-12);
        assert!((r.bound - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.extremal_s, Extremum::Index(1));
        assert!(r.holds);

        let r = lower_bound(&seq(&[4.0], &[2.0], &[0.5]), &sqrt).unwrap();
        assert_eq!(r.lhs, r.bound);

        let r = lower_bound(&seq(&[0.0, 0.0], &[1.0, 1.0], &[1.0, 3.0]), &sqrt).unwrap();
        assert_eq!((r.lhs, r.bound), (0.0, 0.0));
    }

    #[test]
    fn equality_claim_holds_only_at_last_candidate() {
        // Σ over all s can exceed the lhs even when a is constant.
        let s = seq(&[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        let r = upper_bound(&s, &square()).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_eq!(r.bound, 4.0);
        assert_eq!(candidate(&s, &square(), 2).unwrap(), r.lhs);
    }

    #[test]
    fn identity_reproduces_classical_bound() {
        let s = seq(&[5.0, 3.0, 2.0, 0.5], &[1.0, 4.0, 0.0, 2.0], &[0.5, 1.5, 1.0, 2.0]);
        let id = make_power(1.0).unwrap();
        let classical = s.total_pa() * s.total_pb() / s.p().iter().sum::<f64>();
        let at_m = candidate(&s, &id, 4).unwrap();
        assert!((at_m - classical).abs() < 1e-12 * classical);
    }

    #[test]
    fn merge_golden_case_two() {
        let s = seq(&[3.0, 2.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
        let out = merge_step(&s, &square()).unwrap();
        assert_eq!((out.x1, out.x2), (2.5, 4.0));
        assert_eq!((out.h_x1, out.h_x2), (12.5, 17.0));
        assert_eq!(out.case, MergeCase::FuseSecond);
        assert_eq!(out.seq.a(), &[4.0, 1.0]);
        assert_eq!(out.seq.b(), &[1.0, 1.0]);
        assert_eq!(out.seq.p(), &[1.0, 2.0]);
        assert_eq!(out.seq.total_pa(), 6.0);
    }

    #[test]
    fn merge_constant_pair_conserves() {
        let c = 2.5;
        let s = seq(&[c, c], &[1.0, 1.0], &[1.0, 1.0]);
        let out = merge_step(&s, &square()).unwrap();
        assert_eq!(out.x2, 2.0 * c);
        assert_eq!(out.seq.len(), 1);
        assert!((out.seq.total_pa() - 2.0 * c).abs() < 1e-12);
        assert!((out.seq.total_pb() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn merge_single_element_is_an_error() {
        assert!(merge_step(&seq(&[1.0], &[1.0], &[1.0]), &square()).is_err());
    }

    #[test]
    fn terminal_collapse_conserves_and_matches_first_candidate() {
        // h(x2) = M(4) = 16 beats h(x1) = 2 M(2) = 8
        let s = seq(&[3.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]);
        let out = merge_step(&s, &square()).unwrap();
        assert_eq!(out.case, MergeCase::FuseSecond);
        let merged = &out.seq;
        assert_eq!(merged.len(), 1);
        assert!((merged.total_pa() - 4.0).abs() < 1e-12);
        assert!((merged.total_pb() - 2.0).abs() < 1e-12);
        let lhs = lhs_sum(merged, &square());
        assert!((lhs - 16.0).abs() < 1e-9, "{lhs}");
        let before = upper_bound(&s, &square()).unwrap();
        assert!(lhs <= before.bound * (1.0 + 1e-12));
        assert!(lhs >= before.lhs);
    }

    #[test]
    fn chain_golden() {
        let s = seq(&[3.0, 2.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
        let chain = reduce_chain(&s, &square()).unwrap();
        let lhs = chain.lhs_values();
        assert_eq!(&lhs[..2], &[14.0, 18.0]);
        assert_eq!(chain.stages.len(), 3);
        assert!(chain.laws_hold());
        assert!(lhs[2] >= 18.0);
    }

    #[test]
    fn chain_trivial_inputs() {
        let one = seq(&[2.0], &[1.0], &[3.0]);
        let chain = reduce_chain(&one, &square()).unwrap();
        assert_eq!(chain.stages.len(), 1);

        let zeros = seq(&[0.0, 0.0, 0.0, 0.0], &[1.0, 2.0, 0.0, 1.0], &[1.0, 1.0, 2.0, 0.5]);
        let chain = reduce_chain(&zeros, &square()).unwrap();
        assert_eq!(chain.stages.len(), 4);
        assert!(chain.lhs_values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn chain_with_piecewise_linear() {
        let m = make_piecewise_linear(&[0.0, 1.0, 3.0], &[0.0, 1.0, 2.5]).unwrap();
        let s = seq(
            &[4.0, 3.0, 2.2, 1.0, 0.2],
            &[1.0, 0.0, 2.0, 1.0, 3.0],
            &[0.5, 1.0, 0.25, 2.0, 1.0],
        );
        let chain = reduce_chain(&s, &m).unwrap();
        assert_eq!(chain.stages.len(), 5);
        assert!(chain.laws_hold());
    }

    #[test]
    fn geometric_series() {
        let stream = (1..).map(|k| {
            let x = 0.5f64.powi(k);
            (x, x, 1.0)
        });
        let r = truncated_series_bound(stream, &make_power(1.0).unwrap(), 1e-12, 64).unwrap();
        assert!((r.lhs - 1.0 / 3.0).abs() < 1e-9);
        assert!(!r.divergent);
        assert!(r.holds);
    }

    #[test]
    fn finite_stream_matches_finite_bound() {
        let s = seq(&[3.0, 2.0, 1.0], &[0.5, 1.0, 2.0], &[1.0, 0.5, 2.0]);
        let terms: Vec<_> = (0..3).map(|k| (s.a()[k], s.b()[k], s.p()[k])).collect();
        let r = truncated_series_bound(terms.clone(), &square(), 1e-12, 100).unwrap();
        assert_eq!(r, upper_bound(&s, &square()).unwrap());
        let sqrt = make_power(0.5).unwrap();
        let r = truncated_series_bound(terms, &sqrt, 1e-12, 100).unwrap();
        assert_eq!(r, lower_bound(&s, &sqrt).unwrap());
    }

    #[test]
    fn zero_stream_and_divergence() {
        let zeros = std::iter::repeat((0.0, 1.0, 1.0));
        let r = truncated_series_bound(zeros, &square(), 1e-12, 1000).unwrap();
        assert_eq!((r.lhs, r.bound), (0.0, 0.0));
        assert!(!r.divergent);

        // Σ p a diverges: p_k = 1, a_k = 1/k
        let harmonic = (1..).map(|k| (1.0 / k as f64, 1.0 / (k * k) as f64, 1.0));
        let r = truncated_series_bound(harmonic, &square(), 1e-9, 500).unwrap();
        assert!(r.divergent);
    }

    #[test]
    fn non_monotone_stream_rejected() {
        let terms = vec![(1.0, 1.0, 1.0), (2.0, 1.0, 1.0)];
        assert!(truncated_series_bound(terms, &square(), 1e-9, 10).is_err());
    }
}
