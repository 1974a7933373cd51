use mkflow::curvfun::CurvatureSpec;
use mkflow::flow::{FlowOptions, FlowProblem};
use mkflow::grid::build_grid;
use mkflow::initial::{ingest, Hyperboloid, PrimalGraph, SandwichedBump};
use mkflow::oracles::barrier_pair;
use proptest::prelude::*;

fn problem(graph: &dyn PrimalGraph, alpha: f64, t_end: f64) -> FlowProblem {
    let spec = CurvatureSpec::new(2, 0, 1.0, alpha).unwrap();
    let u0 = ingest(graph, build_grid(0.9, 8, 16).unwrap()).unwrap();
    FlowProblem::new(spec, u0, t_end, FlowOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn primal_order_survives_in_the_dual(ca in 0.5f64..2.0, gap in 0.05f64..1.5, alpha in 0.5f64..2.0) {
        let times = [0.05, 0.1];
        let a = problem(&Hyperboloid { c: ca }, alpha, 0.1).run(&times).unwrap();
        let b = problem(&Hyperboloid { c: ca + gap }, alpha, 0.1).run(&times).unwrap();
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            for (x, y) in sa.field.values.iter().zip(&sb.field.values) {
                prop_assert!(y - x <= 1e-10, "u*_b - u*_a = {:e}", y - x);
            }
        }
    }

    #[test]
    fn bump_stays_between_barriers(c0 in 0.3f64..1.0, width in 0.5f64..2.0, cx in -0.5f64..0.5, cy in -0.5f64..0.5) {
        let c1 = c0 + width;
        let bump = SandwichedBump::new(c0, c1).with_center([cx, cy]);
        let p = problem(&bump, 1.0, 0.2);
        let pair = barrier_pair(c0, c1, 1.0).unwrap();
        let mut worst = f64::INFINITY;
        p.run_observed(&[0.2], |s, _| {
            let (lo, hi) = pair.fields(s.grid(), s.t);
            for ((u, l), h) in s.field.values.iter().zip(&lo.values).zip(&hi.values) {
                worst = worst.min((u - l).min(h - u));
            }
        }).unwrap();
        prop_assert!(worst > 0.0, "barrier margin {worst:e}");
    }

    #[test]
    fn solution_decreases_at_every_node(cx in -0.5f64..0.5, cy in -0.5f64..0.5) {
        let bump = SandwichedBump::new(0.5, 2.0).with_center([cx, cy]);
        let tr = problem(&bump, 1.0, 0.1).run(&[0.1]).unwrap();
        for r in &tr.records {
            prop_assert!(r.max_increment < 0.0, "increment {:e} at t = {}", r.max_increment, r.t);
            prop_assert!(r.min_kappa_star > 0.0);
        }
    }
}
