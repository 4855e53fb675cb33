use std::f64::consts::PI;

use shapelab::functionals::{class_lower_bound, disc_value};
use shapelab::optimizer::{
    decode, k_monotonicity_probe, minimize, objective, resume, CircleHole, Decoded, ObjectiveConfig, OptimizeOptions,
    ShapeParams, DEFAULT_MODES, DEFAULT_VERTICES,
};
use shapelab::{Error, Point};

fn cheap(q: f64, k: usize) -> ObjectiveConfig {
    ObjectiveConfig {
        resolution: 24,
        ..ObjectiveConfig::new(q, k)
    }
}

fn quick(budget: usize, seed: u64) -> OptimizeOptions {
    OptimizeOptions {
        fine_resolution: Some(32),
        ..OptimizeOptions::new(budget, seed)
    }
}

#[test]
fn decoded_examples() {
    let disc = ShapeParams::disc(1.0, DEFAULT_MODES);
    let Decoded::Feasible(d) = decode(&disc, 0, DEFAULT_VERTICES).unwrap() else {
        panic!("disc must decode")
    };
    assert!((d.measure().area - PI).abs() < 1e-3);

    let mut annulus = disc.clone();
    annulus.holes.push(CircleHole {
        center: Point::new(0.0, 0.0),
        radius: 0.5,
    });
    let Decoded::Feasible(d) = decode(&annulus, 1, DEFAULT_VERTICES).unwrap() else {
        panic!("annulus must decode")
    };
    assert_eq!(d.hole_count(), 1);

    // r(θ) = 1 + 1.2·cos 3θ dips below zero: the curve would cross itself.
    let mut crossing = disc.clone();
    crossing.a[2] = 1.2;
    assert!(matches!(
        decode(&crossing, 0, DEFAULT_VERTICES).unwrap(),
        Decoded::Infeasible(_)
    ));
    let t = objective(&crossing, &cheap(0.45, 0));
    assert!(!t.feasible);
    assert_eq!(t.value, 1e6);
}

#[test]
fn objective_values() {
    let cfg = ObjectiveConfig {
        resolution: 64,
        ..ObjectiveConfig::new(0.4, 0)
    };
    let disc = objective(&ShapeParams::disc(1.0, DEFAULT_MODES), &cfg);
    assert!((disc.value - 0.976133).abs() < 0.005, "{}", disc.value);
    assert!((disc_value(0.4) - 0.976133).abs() < 1e-6);

    // An elongated shape at q = 1/2 lies between the thin-rectangle limit and the disc.
    let mut long = ShapeParams::disc(1.0, DEFAULT_MODES);
    long.a[1] = 0.6;
    let cfg = ObjectiveConfig {
        resolution: 64,
        ..ObjectiveConfig::new(0.5, 0)
    };
    let v = objective(&long, &cfg).value;
    assert!(v > 1.0 / 3f64.sqrt() && v < 0.5f64.sqrt(), "{v}");
}

#[test]
fn run_is_reproducible_and_respects_the_bound() {
    let init = ShapeParams::disc(1.0, DEFAULT_MODES);
    let a = minimize(&init, &cheap(0.45, 0), &quick(120, 7)).unwrap();
    let b = minimize(&init, &cheap(0.45, 0), &quick(120, 7)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.history.len(), 120);
    assert!(a.best_value <= a.initial_value);
    let best = a.running_best();
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    assert!(a.bound_violations.is_empty());
    assert!((a.bound - class_lower_bound(0.45, 0)).abs() < 1e-15);
    assert!((a.gap - (a.reported_value() - a.bound)).abs() < 1e-15);
    let fine = a.fine.as_ref().unwrap();
    assert!(fine.finalists.iter().any(|f| f.params == init));

    let c = minimize(&init, &cheap(0.45, 0), &quick(120, 8)).unwrap();
    assert_ne!(a.history, c.history);
}

#[test]
fn resumed_run_extends_history() {
    let init = ShapeParams::disc(1.0, DEFAULT_MODES);
    let first = minimize(&init, &cheap(0.45, 0), &quick(80, 3)).unwrap();
    let json = serde_json::to_string(&first).unwrap();
    let back: shapelab::optimizer::OptimizationRun = serde_json::from_str(&json).unwrap();
    let more = resume(&back, 60).unwrap();
    assert_eq!(more.history.len(), 140);
    assert!(more.history.iter().enumerate().all(|(i, e)| e.index == i));
    assert!(more.best_value <= first.best_value);
    assert_eq!(more.options.budget, 140);
    assert_eq!(resume(&back, 60).unwrap(), more);
}

#[test]
fn empty_budget_and_bad_settings() {
    let init = ShapeParams::disc(1.0, DEFAULT_MODES);
    match minimize(&init, &cheap(0.45, 0), &quick(0, 1)) {
        Err(Error::NoFeasiblePoint { budget, history }) => {
            assert_eq!(budget, 0);
            assert!(history.is_empty());
        }
        other => panic!("expected no feasible point, got {other:?}"),
    }
    assert!(minimize(&init, &cheap(0.0, 0), &quick(10, 1)).is_err());

    // A start outside the class is infeasible; nothing else is tried nearby
    // that could repair it within a handful of evaluations.
    let mut holed = init.clone();
    holed.holes.push(CircleHole {
        center: Point::new(0.0, 0.0),
        radius: 0.3,
    });
    let err = minimize(&holed, &cheap(0.45, 0), &quick(5, 1)).unwrap_err();
    assert!(err.to_string().contains("no feasible point"));
}

#[test]
fn holes_enter_the_search() {
    let mut init = ShapeParams::disc(1.0, DEFAULT_MODES);
    init.holes.push(CircleHole {
        center: Point::new(0.3, 0.0),
        radius: 0.05,
    });
    let run = minimize(&init, &cheap(0.5, 1), &quick(150, 2)).unwrap();
    assert_eq!(run.search_dimension(), 2 * DEFAULT_MODES + 3);
    assert_eq!(run.best.holes.len(), 1);
    assert!(run.best_value <= run.initial_value);
}

#[test]
fn monotonicity_probe_reports_each_seed() {
    let report = k_monotonicity_probe(0.5, 150, &[1, 2, 3], 24, None).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.holds, report.rows.iter().filter(|r| r.k2 <= r.k0).count());
    for r in &report.rows {
        assert!(r.k0 >= class_lower_bound(0.5, 0) * 0.98);
        assert!(r.k2 >= class_lower_bound(0.5, 2) * 0.98);
    }
}
