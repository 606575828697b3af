use genhess::model::{ExactFunction, FunctionSpec, Params, ProblemInstance, QuadraticForm};
use genhess::polygeom::{ConvexPolyhedron, PolyUnion};
use genhess::rational::{int, rvec, Rat};
use genhess::regularity::*;

fn exact(q: &[i64], pieces: Vec<ConvexPolyhedron>) -> FunctionSpec {
    let qf = QuadraticForm::diagonal(&q.iter().map(|&v| int(v)).collect::<Vec<_>>());
    if pieces.is_empty() {
        FunctionSpec::Exact(ExactFunction::unconstrained(qf))
    } else {
        FunctionSpec::Exact(ExactFunction::new(qf, PolyUnion::new(pieces).unwrap()).unwrap())
    }
}

fn inst(f: FunctionSpec, xbar: &[i64], xstar: &[i64]) -> ProblemInstance {
    ProblemInstance::new(f, rvec(xbar), rvec(xstar), Params::default()).unwrap()
}

fn axes() -> Vec<ConvexPolyhedron> {
    (0..2)
        .map(|i| {
            let mut e = rvec(&[0, 0]);
            e[i] = int(1);
            ConvexPolyhedron::from_system(2, vec![], vec![(e, int(0))])
        })
        .collect()
}

fn wedge() -> ProblemInstance {
    let w = ConvexPolyhedron::new(vec![rvec(&[-1, 1]), rvec(&[-1, -1])], vec![int(0), int(0)], 2).unwrap();
    let mut p = Params::default();
    p.gamma = 0.5;
    ProblemInstance::new(exact(&[2, -2], vec![w]), rvec(&[0, 0]), rvec(&[0, 0]), p).unwrap()
}

fn half_line_linear() -> ProblemInstance {
    let p = ConvexPolyhedron::new(vec![rvec(&[-1])], vec![int(0)], 1).unwrap();
    let qf = QuadraticForm::new(vec![vec![Rat::from_integer(0.into())]], rvec(&[1]), int(0)).unwrap();
    let f = FunctionSpec::Exact(ExactFunction::new(qf, PolyUnion::new(vec![p]).unwrap()).unwrap());
    inst(f, &[0], &[0])
}

#[test]
fn subregularity_examples() {
    let m = estimate_subregularity_modulus(&inst(exact(&[1], vec![]), &[0], &[0])).unwrap();
    assert!((m.value - 1.0).abs() < 0.02 && m.converged, "{m:?}");
    let m = estimate_subregularity_modulus(&inst(exact(&[1, 2], vec![]), &[0, 0], &[0, 0])).unwrap();
    assert!((m.value - 1.0).abs() < 0.02 && m.converged, "{m:?}");
    let m = estimate_subregularity_modulus(&half_line_linear()).unwrap();
    assert!((m.value - 0.1).abs() < 1e-12, "{m:?}");
}

#[test]
fn growth_examples() {
    let g = check_growth(&inst(exact(&[1, 2], vec![]), &[0, 0], &[0, 0]), 1.0, GrowthMode::NormSquared).unwrap();
    assert!(g.passed() && (g.alpha_hat - 1.0).abs() < 0.01, "{}", g.alpha_hat);
    let g = check_growth(&inst(exact(&[-1], vec![]), &[0], &[0]), 0.5, GrowthMode::NormSquared).unwrap();
    assert!(g.violation_count > 0);
}

#[test]
fn prox_examples() {
    let r = check_lower_prox_inequality(&inst(exact(&[1, 2], vec![]), &[0, 0], &[0, 0]), 0.0, ProxMode::GraphDistance).unwrap();
    assert!(r.passed);
    let r = check_lower_prox_inequality(&inst(exact(&[-1], vec![]), &[0], &[0]), 0.5, ProxMode::ProxRegular).unwrap();
    assert!(!r.passed && (r.required - 1.0).abs() < 1e-3, "{r:?}");
}

#[test]
fn metric_regularity_examples() {
    let m = estimate_metric_regularity_modulus(&inst(exact(&[1, 2], vec![]), &[0, 0], &[0, 0])).unwrap();
    assert!((m.value - 1.0).abs() < 0.02 && m.converged, "{m:?}");
    let m = estimate_metric_regularity_modulus(&inst(exact(&[2, 2], axes()), &[0, 0], &[0, 0])).unwrap();
    assert!(m.converged && m.value.is_finite(), "{m:?}");
    println!("cross axes kappa {}", m.value);
}

#[test]
fn uniform_growth_examples() {
    let q = inst(exact(&[1, 2], vec![]), &[0, 0], &[0, 0]);
    assert_eq!(check_uniform_growth(&q, 1.0).unwrap().verdict, GridVerdict::NoCounterexampleOnGrid);
    assert_eq!(check_uniform_growth(&q, 0.4).unwrap().verdict, GridVerdict::Fails);
    assert_eq!(check_uniform_growth(&wedge(), 1.0).unwrap().verdict, GridVerdict::Fails);
}

#[test]
fn localization_examples() {
    let r = check_single_valued_localization(&inst(exact(&[2, 2], axes()), &[0, 0], &[0, 0])).unwrap();
    assert_eq!(r.verdict, GridVerdict::Fails);
    let w = r.witness.unwrap();
    assert!((w.tilt[0].abs() - w.tilt[1].abs()).abs() <= 1e-9, "{w:?}");
    let r = check_single_valued_localization(&inst(exact(&[1], vec![]), &[0], &[0])).unwrap();
    assert_eq!(r.verdict, GridVerdict::NoCounterexampleOnGrid);
    assert!((r.lipschitz - 1.0).abs() < 1e-9);
    assert_eq!(check_single_valued_localization(&wedge()).unwrap().verdict, GridVerdict::Fails);
}

#[test]
fn tilt_examples() {
    let q = inst(exact(&[1, 2], vec![]), &[0, 0], &[0, 0]);
    let s = solve_tilt(&q, &[0.1, 0.1]).unwrap();
    assert_eq!(s.minimizers.len(), 1);
    assert!((s.minimizers[0][0] - 0.1).abs() < 1e-12 && (s.minimizers[0][1] - 0.05).abs() < 1e-12);
    let v = tilt_stability_verdict(&q).unwrap();
    match v.verdict {
        TiltVerdict::Stable { kappa } => assert!((kappa - 1.0).abs() < 0.05),
        other => panic!("{other:?}"),
    }

    let r = inst(exact(&[2, 2], axes()), &[0, 0], &[0, 0]);
    let s = solve_tilt(&r, &[0.1, 0.1]).unwrap();
    assert_eq!(s.minimizers.len(), 2, "{s:?}");
    assert!(!tilt_stability_verdict(&r).unwrap().is_stable());

    let s = solve_tilt(&wedge(), &[0.0, 0.0]).unwrap();
    assert!(s.minimizers.len() >= 2 && s.diameter() >= 0.4 && s.value.abs() < 1e-12, "{s:?}");
    assert!(!tilt_stability_verdict(&wedge()).unwrap().is_stable());
}

#[test]
fn second_order_bounds() {
    assert!(check_combined_lower_bound(&inst(exact(&[1], vec![]), &[0], &[0]), 1.0, 0.5).unwrap().passed);
    assert!(!check_combined_lower_bound(&inst(exact(&[-1], vec![]), &[0], &[0]), 1.0, 0.5).unwrap().passed);
    assert!(check_combined_lower_bound(&inst(exact(&[1, 2], vec![]), &[0, 0], &[0, 0]), 1.0, 0.0).unwrap().passed);
}
