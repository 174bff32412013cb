use proptest::prelude::*;

use cheby_core::continuous::{
    bound_for_triple, classical_chebyshev, BoundOptions, Interval, Monotonicity, SGrid, SampledFunction, WeightedTriple,
};
use cheby_core::curvature::{make_piecewise_linear, make_power};
use cheby_core::discrete::{candidate, lhs_sum, lower_bound, merge_step, upper_bound, WeightedSequence};
use cheby_core::lab::oracle_discrete;
use cheby_core::CurvedFunction;

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
}

prop_compose! {
    fn sequence(max_len: usize)(rows in prop::collection::vec((0.0..10.0f64, 0.0..10.0f64, 0.01..10.0f64), 1..=max_len)) -> WeightedSequence {
        let mut a: Vec<f64> = rows.iter().map(|r| r.0).collect();
        a.sort_by(|x, y| y.total_cmp(x));
        WeightedSequence::new(a, rows.iter().map(|r| r.1).collect(), rows.iter().map(|r| r.2).collect()).unwrap()
    }
}

fn convex_outer() -> impl Strategy<Value = CurvedFunction> {
    prop_oneof![
        (1.0..4.0f64).prop_map(|e| make_power(e).unwrap()),
        (
            prop::collection::vec(-2.0..4.0f64, 1..4),
            prop::collection::vec(0.1..3.0f64, 0..3)
        )
            .prop_map(|(mut s, w)| {
                s.truncate(w.len() + 1);
                s.sort_by(f64::total_cmp);
                let mut knots = vec![0.0];
                for gap in w.iter().take(s.len() - 1) {
                    knots.push(knots.last().unwrap() + gap);
                }
                make_piecewise_linear(&s, &knots).unwrap()
            }),
    ]
}

fn concave_outer() -> impl Strategy<Value = CurvedFunction> {
    (0.1..1.0f64).prop_map(|e| make_power(e).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn upper_bound_dominates(seq in sequence(12), m in convex_outer()) {
        let r = upper_bound(&seq, &m).unwrap();
        prop_assert!(r.holds, "lhs {} bound {}", r.lhs, r.bound);
    }

    #[test]
    fn lower_bound_is_dominated(seq in sequence(12), m in concave_outer()) {
        let r = lower_bound(&seq, &m).unwrap();
        prop_assert!(r.holds, "lhs {} bound {}", r.lhs, r.bound);
    }

    #[test]
    fn matches_oracle(seq in sequence(12), m in convex_outer()) {
        let r = upper_bound(&seq, &m).unwrap();
        let o = oracle_discrete(&seq, &m);
        prop_assert!(close(r.lhs, o.lhs, 1e-12));
        prop_assert!(close(r.bound, o.bound, 1e-12));
    }

    #[test]
    fn constant_values_give_equality(c in 0.0..10.0f64, rows in prop::collection::vec((0.0..10.0f64, 0.01..10.0f64), 1..12), m in convex_outer()) {
        let n = rows.len();
        let seq = WeightedSequence::new(vec![c; n], rows.iter().map(|r| r.0).collect(), rows.iter().map(|r| r.1).collect()).unwrap();
        prop_assert!(close(candidate(&seq, &m, n).unwrap(), lhs_sum(&seq, &m), 1e-12));
    }

    #[test]
    fn merge_conserves_totals(seq in sequence(10).prop_filter("two or more", |s| s.len() >= 2), m in convex_outer()) {
        let out = merge_step(&seq, &m).unwrap();
        prop_assert_eq!(out.seq.len(), seq.len() - 1);
        prop_assert!(close(out.seq.total_pa(), seq.total_pa(), 1e-12));
        prop_assert!(close(out.seq.total_pb(), seq.total_pb(), 1e-12));
        prop_assert!(out.seq.a().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(lhs_sum(&out.seq, &m) >= lhs_sum(&seq, &m) - 1e-9 * (1.0 + lhs_sum(&seq, &m).abs()));
    }

    #[test]
    fn step_triples_agree_with_sequences(
        pieces in prop::collection::vec((0.0..5.0f64, 0.0..5.0f64, 0.1..5.0f64), 1..8),
        m in convex_outer(),
    ) {
        let n = pieces.len();
        let iv = Interval::unit();
        let breaks: Vec<f64> = (1..n).map(|k| k as f64 / n as f64).collect();
        let mut fv: Vec<f64> = pieces.iter().map(|r| r.0).collect();
        fv.sort_by(|x, y| y.total_cmp(x));
        let gv: Vec<f64> = pieces.iter().map(|r| r.1).collect();
        let pv: Vec<f64> = pieces.iter().map(|r| r.2).collect();
        let t = WeightedTriple::new(
            SampledFunction::steps(iv, &breaks, &fv, Monotonicity::Nonincreasing).unwrap(),
            SampledFunction::steps(iv, &breaks, &gv, Monotonicity::None).unwrap(),
            SampledFunction::steps(iv, &breaks, &pv, Monotonicity::None).unwrap(),
        ).unwrap();
        let seq = WeightedSequence::new(
            fv.clone(),
            gv.clone(),
            pv.iter().map(|p| p / n as f64).collect(),
        ).unwrap();
        let mut points = breaks.clone();
        points.push(1.0);
        let opts = BoundOptions::default().with_panels(64).with_grid(SGrid::Points(points));
        let cont = bound_for_triple(&t, &m, &opts).unwrap();
        let disc = upper_bound(&seq, &m).unwrap();
        prop_assert!(close(cont.lhs, disc.lhs, 1e-9));
        prop_assert!(close(cont.bound, disc.bound, 1e-9));
    }

    #[test]
    fn classical_relation_holds(
        fv in prop::collection::vec(0.0..5.0f64, 2..8),
        gv in prop::collection::vec(0.0..5.0f64, 2..8),
        same in any::<bool>(),
    ) {
        let iv = Interval::unit();
        let knots = |n: usize| (0..n).map(|k| k as f64 / (n - 1) as f64).collect::<Vec<_>>();
        let mut fv = fv;
        fv.sort_by(f64::total_cmp);
        let mut gv = gv;
        let g_kind = if same {
            gv.sort_by(f64::total_cmp);
            Monotonicity::Nondecreasing
        } else {
            gv.sort_by(|x, y| y.total_cmp(x));
            Monotonicity::Nonincreasing
        };
        let f = SampledFunction::piecewise_linear(iv, &knots(fv.len()), &fv, Monotonicity::Nondecreasing).unwrap();
        let g = SampledFunction::piecewise_linear(iv, &knots(gv.len()), &gv, g_kind).unwrap();
        let p = SampledFunction::constant(iv, 1.0).unwrap();
        let r = classical_chebyshev(&p, &f, &g, 1024, 1e-9).unwrap();
        prop_assert!(r.holds, "{} vs {}", r.lhs, r.rhs);
    }
}
