use std::f64::consts::TAU;

use proptest::prelude::*;
use shapelab::functionals;
use shapelab::optimizer::simplex::{minimize, SimplexOptions};
use shapelab::optimizer::{running_best, Evaluation, Trial};
use shapelab::report::InequalityReport;
use shapelab::torsion::{solve_torsion, DEFAULT_REL_TOL};
use shapelab::{PlanarDomain, Point, RasterMask};

/// Star-shaped polygon with the given radii at equal angles.
fn star(radii: &[f64]) -> Vec<Point> {
    let n = radii.len();
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| Point::polar(r, TAU * i as f64 / n as f64))
        .collect()
}

fn scaled(pts: &[Point], s: f64, shift: Point) -> Vec<Point> {
    pts.iter()
        .map(|p| Point::new(s * p.x + shift.x, s * p.y + shift.y))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn measures_scale_and_translate(
        radii in proptest::collection::vec(0.6f64..1.4, 8..24),
        s in 0.25f64..4.0,
        dx in -5.0f64..5.0,
        dy in -5.0f64..5.0,
    ) {
        let base = star(&radii);
        let a = PlanarDomain::new(vec![base.clone()], vec![], vec![]).unwrap().measure();
        let b = PlanarDomain::new(vec![scaled(&base, s, Point::new(dx, dy))], vec![], vec![]).unwrap().measure();
        prop_assert!((b.area - s * s * a.area).abs() <= 1e-9 * b.area);
        prop_assert!((b.perimeter - s * a.perimeter).abs() <= 1e-9 * b.perimeter);
        prop_assert!(a.pk_lower <= a.pk_upper);
        prop_assert!(2.0 * std::f64::consts::PI.sqrt() <= a.perimeter / a.area.sqrt() + 1e-12);
    }

    #[test]
    fn slit_measures_are_ordered(
        radii in proptest::collection::vec(0.8f64..1.2, 12..24),
        angle in 0.0f64..TAU,
        r0 in 0.0f64..0.3,
        r1 in 0.35f64..0.7,
    ) {
        let slit = vec![Point::polar(r0, angle), Point::polar(r1, angle)];
        let d = PlanarDomain::new(vec![star(&radii)], vec![], vec![slit]).unwrap();
        let m = d.measure();
        prop_assert!(m.perimeter < m.boundary_h1);
        prop_assert!(m.boundary_h1 == m.pk_lower);
        prop_assert!(m.pk_lower < m.pk_upper);
        prop_assert!((m.pk_upper - m.perimeter - 2.0 * (r1 - r0)).abs() < 1e-9);
    }

    #[test]
    fn running_best_never_increases(values in proptest::collection::vec((0.0f64..10.0, any::<bool>()), 0..200)) {
        let history: Vec<Evaluation> = values
            .iter()
            .enumerate()
            .map(|(index, &(value, feasible))| Evaluation { index, value, feasible })
            .collect();
        let best = running_best(&history);
        prop_assert_eq!(best.len(), history.len());
        for w in best.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for (b, e) in best.iter().zip(&history) {
            if e.feasible {
                prop_assert!(*b <= e.value);
            }
        }
    }

    #[test]
    fn simplex_never_ends_above_its_start(
        centre in proptest::collection::vec(-2.0f64..2.0, 2..6),
        seed in any::<u64>(),
        budget in 1usize..300,
    ) {
        let c = centre.clone();
        let f = move |x: &[f64]| Trial::feasible(x.iter().zip(&c).map(|(a, b)| (a - b).abs()).sum());
        let x0 = vec![0.0; centre.len()];
        let opts = SimplexOptions {
            budget,
            tol: 1e-9,
            step: vec![0.3; centre.len()],
            seed,
            stall_iterations: 100,
            idle_restarts: 3,
        };
        let out = minimize(&f, &x0, &opts);
        prop_assert!(out.history.len() <= budget);
        let (_, best) = out.best.unwrap();
        prop_assert!(best <= out.history[0].value);
        let again = minimize(&f, &x0, &opts);
        prop_assert_eq!(out.history, again.history);
    }

    #[test]
    fn report_orientation(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0) {
        let le = InequalityReport::at_most("x", "x", lhs, rhs, 0.0);
        let ge = InequalityReport::at_least("x", "x", lhs, rhs, 0.0);
        prop_assert_eq!(le.pass, lhs <= rhs);
        prop_assert_eq!(ge.pass, lhs >= rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Scaling the domain and the grid together gives a congruent problem,
    /// so T scales as s⁴ and F_q does not move.
    #[test]
    fn functional_is_scale_free(radii in proptest::collection::vec(0.7f64..1.3, 10..16), s in 0.5f64..3.0) {
        let h = 1.0 / 32.0;
        let base = star(&radii);
        let a = PlanarDomain::new(vec![base.clone()], vec![], vec![]).unwrap();
        let b = PlanarDomain::new(vec![scaled(&base, s, Point::new(0.0, 0.0))], vec![], vec![]).unwrap();
        let ta = solve_torsion(&RasterMask::rasterize(&a, h).unwrap(), DEFAULT_REL_TOL).unwrap().torsion;
        let tb = solve_torsion(&RasterMask::rasterize(&b, s * h).unwrap(), DEFAULT_REL_TOL).unwrap().torsion;
        prop_assert!((tb - s.powi(4) * ta).abs() <= 1e-6 * tb);
        for q in [0.1, 0.3, 0.5] {
            let fa = functionals::evaluate(&a.measure(), ta, q, 0).unwrap().f_q;
            let fb = functionals::evaluate(&b.measure(), tb, q, 0).unwrap().f_q;
            prop_assert!((fa - fb).abs() <= 1e-6 * fa);
        }
    }
}
