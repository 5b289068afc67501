use std::f64::consts::PI;

use qgnls::asymptotics::predict_edge;
use qgnls::solver::{
    constant_seed, continue_branch, seed_from_prediction, solve_state, validate_state,
    ArclengthOptions, Discretization, DiscretizationOptions, NewtonOptions, StateViolation,
    StationaryState,
};
use qgnls::MetricGraph;

fn interval(length: f64) -> MetricGraph {
    MetricGraph::builder()
        .vertex("a")
        .vertex("b")
        .edge("e", "a", "b", length)
        .build()
        .unwrap()
}

fn star() -> MetricGraph {
    MetricGraph::builder()
        .vertex("c")
        .vertex("p")
        .vertex("x")
        .vertex("y")
        .vertex("z")
        .edge("pend", "c", "p", 1.5)
        .edge("e1", "c", "x", 1.0)
        .edge("e2", "c", "y", 1.5)
        .edge("e3", "c", "z", 2.0)
        .build()
        .unwrap()
}

#[test]
fn constant_branch_matches_closed_form() {
    let d = Discretization::new(&interval(1.0), DiscretizationOptions::new(2.0, 30.0)).unwrap();
    let seed = constant_seed(&d, -1.0).unwrap();
    let opts = ArclengthOptions {
        lambda_max: -0.5,
        lambda_min: -3.0,
        increasing: false,
        newton: NewtonOptions {
            max_iterations: 8,
            tolerance: 1e-14,
            max_halvings: 0,
        },
        ..Default::default()
    };
    let b = continue_branch(&d, &seed, opts).unwrap();
    assert!(b.points.len() > 5);
    for p in &b.points {
        assert!(
            (p.mass - 0.5 * p.lambda.abs()).abs() < 1e-10,
            "Q at {}: {} vs {}",
            p.lambda,
            p.mass,
            0.5 * p.lambda.abs()
        );
        assert!(
            (p.energy + 0.25 * p.lambda * p.lambda).abs() < 1e-10,
            "E at {}",
            p.lambda
        );
    }
    assert!(b.bifurcation_suspects.is_empty());
}

#[test]
fn constant_branch_bifurcation_is_detected() {
    // the linearization -d²/dx² + 2Λ on (0, 1) is singular at Λ = -π²/2
    let d = Discretization::new(&interval(1.0), DiscretizationOptions::new(3.0, 40.0)).unwrap();
    let seed = constant_seed(&d, -3.0).unwrap();
    let opts = ArclengthOptions {
        lambda_min: -7.0,
        increasing: false,
        ..Default::default()
    };
    let b = continue_branch(&d, &seed, opts).unwrap();
    let at = b
        .bifurcation_suspects
        .iter()
        .map(|&i| 0.5 * (b.points[i].lambda + b.points[i + 1].lambda))
        .collect::<Vec<_>>();
    assert_eq!(at.len(), 1, "suspects {at:?}");
    let i = b.bifurcation_suspects[0];
    let (lo, hi) = (
        b.points[i + 1].lambda.min(b.points[i].lambda),
        b.points[i + 1].lambda.max(b.points[i].lambda),
    );
    let target = -PI * PI / 2.0;
    assert!(
        lo - 1e-3 <= target && target <= hi + 1e-3,
        "bracket [{lo}, {hi}]"
    );
}

#[test]
fn pendant_seed_peaks_at_free_end_and_converges_clean() {
    let g = star();
    let e = g.edge_by_id("pend").unwrap();
    let mu = 4.0;
    let d = Discretization::new(&g, DiscretizationOptions::new(mu, 30.0)).unwrap();
    let pred = predict_edge(&g, e, mu).unwrap();
    let seed = seed_from_prediction(&pred, &d).unwrap();
    let f = d.edge_values(&seed.values, e);
    let top = (0..f.len()).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
    assert!(top == 0 || top == f.len() - 1);
    let state = solve_state(&d, &seed, NewtonOptions::default()).unwrap();
    assert!(state.residual < 1e-12);
    assert_eq!(state.localization.map(|l| l.0), Some(e));
    assert!((state.mass - pred.mass).abs() / pred.mass < 1e-3);
    let report = validate_state(&d, &state);
    assert!(report.is_clean(), "{:?}", report.violations);
    assert_eq!(report.strict_maxima, 1);
}

#[test]
fn validation_flags_two_bumps_and_negative_values() {
    let d = Discretization::new(&interval(10.0), DiscretizationOptions::new(2.0, 20.0)).unwrap();
    let two = d.sample(|_, x| 1.0 / (2.0 * (x - 2.5)).cosh() + 1.0 / (2.0 * (x - 7.5)).cosh());
    let report = validate_state(&d, &StationaryState::new(&d, -4.0, two, 0));
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, StateViolation::MultipleMaxima { .. })));
    let signed = d.sample(|_, x| (x - 5.0) / 5.0);
    let report = validate_state(&d, &StationaryState::new(&d, -4.0, signed, 0));
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, StateViolation::Negative { .. })));
}

#[test]
fn tail_flatter_than_tolerance_is_not_a_maximum() {
    let d = Discretization::new(&interval(10.0), DiscretizationOptions::new(2.0, 20.0)).unwrap();
    let decaying = d.sample(|_, x| 1.0 / (2.0 * x).cosh());
    let report = validate_state(&d, &StationaryState::new(&d, -4.0, decaying, 0));
    assert!(report.is_clean(), "{:?}", report.violations);
    assert_eq!(report.strict_maxima, 1);
}
