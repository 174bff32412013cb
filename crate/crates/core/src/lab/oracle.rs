//! Brute-force reference computations, written independently of the main
//! paths: no prefix caches, no compensated sums, Simpson instead of the
//! trapezoid rule, and no hypothesis checks (so control targets can use them).

use crate::continuous::{Side, WeightedTriple, DEFAULT_PANELS, DEFAULT_S_GRID};
use crate::curvature::{Curvature, CurvedFunction};
use crate::discrete::WeightedSequence;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub lhs: f64,
    pub bound: f64,
    /// 1-based index for sequences, point `s` for triples.
    pub extremal_s: f64,
}

fn better(curvature: Curvature, candidate: f64, incumbent: f64) -> bool {
    match curvature {
        Curvature::Convex => candidate > incumbent,
        Curvature::Concave => candidate < incumbent,
    }
}

/// Exhaustive `O(m²)` evaluation of `Σ p b M(a)` and the extremal candidate,
/// summing in reverse index order.
pub fn oracle_discrete(seq: &WeightedSequence, m: &CurvedFunction) -> OracleValue {
    oracle_discrete_raw(seq.a(), seq.b(), seq.p(), m)
}

/// Same on raw slices, without checking that `a` is nonincreasing.
pub fn oracle_discrete_raw(a: &[f64], b: &[f64], p: &[f64], m: &CurvedFunction) -> OracleValue {
    let n = a.len();
    let mut lhs = 0.0;
    let mut total = 0.0;
    for k in (0..n).rev() {
        lhs += p[k] * b[k] * m.eval(a[k]);
        total += p[k] * a[k];
    }
    let mut best = (f64::NAN, 0usize);
    for s in 1..=n {
        let mut mass = 0.0;
        let mut weight = 0.0;
        for k in (0..s).rev() {
            mass += p[k];
            weight += p[k] * b[k];
        }
        let cand = m.eval(total / mass) * weight;
        if best.1 == 0 || better(m.curvature(), cand, best.0) {
            best = (cand, s);
        }
    }
    OracleValue {
        lhs,
        bound: best.0,
        extremal_s: best.1 as f64,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub panels: usize,
    pub s_grid: usize,
    /// Use `∫_s^b` (nondecreasing `f`) instead of `∫_a^s`.
    pub suffix: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            panels: 4 * DEFAULT_PANELS,
            s_grid: 10 * DEFAULT_S_GRID,
            suffix: false,
        }
    }
}

/// Simpson running integrals of `p` and `p·g` plus totals of `p·f` and `p·g·M(f)`.
struct Running<'a> {
    t: &'a WeightedTriple,
    nodes: Vec<f64>,
    mass: Vec<f64>,
    weight: Vec<f64>,
    total_pf: f64,
    lhs: f64,
}

fn simpson<F: Fn(f64, Side) -> f64>(h: F, u: f64, v: f64) -> f64 {
    let mid = 0.5 * (u + v);
    (v - u) / 6.0 * (h(u, Side::Right) + 4.0 * h(mid, Side::Right) + h(v, Side::Left))
}

impl<'a> Running<'a> {
    fn new(t: &'a WeightedTriple, m: &CurvedFunction, panels: usize) -> Self {
        let iv = t.interval();
        let mut nodes: Vec<f64> = (0..=panels)
            .map(|i| iv.left + iv.width() * (i as f64 / panels as f64))
            .collect();
        *nodes.last_mut().expect("nonempty") = iv.right;
        for set in [t.f.breakpoints(), t.g.breakpoints(), t.p.breakpoints()] {
            nodes.extend(set.iter().copied().filter(|&x| iv.left < x && x < iv.right));
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();

        let mut mass = vec![0.0];
        let mut weight = vec![0.0];
        let (mut total_pf, mut lhs) = (0.0, 0.0);
        for w in nodes.windows(2) {
            let (u, v) = (w[0], w[1]);
            mass.push(mass.last().unwrap() + simpson(|x, sd| t.p.value(x, sd), u, v));
            weight.push(weight.last().unwrap() + simpson(|x, sd| t.p.value(x, sd) * t.g.value(x, sd), u, v));
            total_pf += simpson(|x, sd| t.p.value(x, sd) * t.f.value(x, sd), u, v);
            lhs += simpson(
                |x, sd| t.p.value(x, sd) * t.g.value(x, sd) * m.eval(t.f.value(x, sd)),
                u,
                v,
            );
        }
        Self {
            t,
            nodes,
            mass,
            weight,
            total_pf,
            lhs,
        }
    }

    /// `(∫_a^s p, ∫_a^s p g)`
    fn upto(&self, s: f64) -> (f64, f64) {
        let i = self.nodes.partition_point(|&x| x <= s).saturating_sub(1);
        let u = self.nodes[i];
        if s <= u {
            return (self.mass[i], self.weight[i]);
        }
        let t = self.t;
        (
            self.mass[i] + simpson(|x, sd| t.p.value(x, sd), u, s),
            self.weight[i] + simpson(|x, sd| t.p.value(x, sd) * t.g.value(x, sd), u, s),
        )
    }
}

/// Recomputes `∫ p g M(f)` and the extremal candidate at the resolution of `opts`.
pub fn oracle_continuous_with(t: &WeightedTriple, m: &CurvedFunction, opts: OracleOptions) -> OracleValue {
    let run = Running::new(t, m, opts.panels.max(1));
    let iv = t.interval();
    let n = opts.s_grid.max(1);
    let (total_mass, total_weight) = (*run.mass.last().unwrap(), *run.weight.last().unwrap());
    let mut points: Vec<f64> = (0..=n).map(|j| iv.left + iv.width() * (j as f64 / n as f64)).collect();
    *points.last_mut().unwrap() = iv.right;
    points.extend(t.breakpoints());
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut best = (f64::NAN, f64::NAN);
    for &s in &points {
        let (mass, weight) = if opts.suffix {
            if s >= iv.right {
                continue;
            }
            let (pm, pw) = run.upto(s);
            (total_mass - pm, total_weight - pw)
        } else {
            if s <= iv.left {
                continue;
            }
            run.upto(s)
        };
        let cand = m.eval(run.total_pf / mass) * weight;
        if best.1.is_nan() || better(m.curvature(), cand, best.0) {
            best = (cand, s);
        }
    }
    OracleValue {
        lhs: run.lhs,
        bound: best.0,
        extremal_s: best.1,
    }
}

/// [`oracle_continuous_with`] at 4× the default panels and 10× the default s-grid.
pub fn oracle_continuous(t: &WeightedTriple, m: &CurvedFunction) -> OracleValue {
    oracle_continuous_with(t, m, OracleOptions::default())
}
