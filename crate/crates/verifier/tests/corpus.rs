use proptest::prelude::*;

use genhess::hessian::{hessian_sum_rule_check, HessianMap};
use genhess::polygeom::forms::{form_sign, FormSign};
use genhess::rational::{approx_f64, int, RVec, Rat};
use genhess::regularity::{GridVerdict, TiltVerdict};
use genhess::subdiff::{frechet_subdifferential, sample_members, subdifferential};
use genhess_verifier::fixtures::corpus;
use genhess_verifier::outcome::{overall, Check, Escalation, Status, SuiteResult};
use genhess_verifier::report::{Format, Report, ReportKind};
use genhess_verifier::suites::{run_suites, Corpus, REGISTRY};

#[test]
fn every_expectation_is_checked_and_holds() {
    let all: Vec<_> = REGISTRY.iter().collect();
    let results = run_suites(&all, &Corpus::load(), false);
    for f in corpus() {
        for c in f.expected.keys() {
            let name = format!("expected {}", c.name());
            let hits: Vec<&Check> = results.iter().flat_map(|r| &r.checks).filter(|k| k.fixture() == Some(f.name) && k.name() == name).collect();
            assert!(!hits.is_empty(), "{} {} never checked", f.name, c.name());
            for h in hits {
                assert_eq!(h.status(), Status::Pass, "{} {}: {}", f.name, c.name(), h.detail());
            }
        }
    }
    assert!(results.iter().all(|r| !r.failed()));
    let again = run_suites(&all, &Corpus::load(), false);
    assert_eq!(Report::new(ReportKind::Verify, results).to_json(), Report::new(ReportKind::Verify, again).to_json());
}

#[test]
fn sum_rule_holds_on_the_corpus() {
    for f in corpus().into_iter().filter(|f| f.is_exact()) {
        let i = &f.instance;
        assert!(hessian_sum_rule_check(&i.f, &i.xbar, &i.xstar).unwrap(), "{}", f.name);
    }
}

#[test]
fn frechet_subgradients_are_limiting_on_the_corpus() {
    for f in corpus().into_iter().filter(|f| f.is_exact()) {
        let i = &f.instance;
        let lim = subdifferential(&i.f, &i.xbar).unwrap();
        for v in sample_members(&frechet_subdifferential(&i.f, &i.xbar).unwrap()) {
            assert!(lim.contains(&v), "{}: {v:?}", f.name);
        }
    }
}

/// Largest t with ‖u*‖² ≥ t‖u‖² on the graph of the generalized Hessian.
fn min_ratio_squared(map: &HessianMap) -> f64 {
    let n = map.n;
    let form = |t: &Rat| -> Vec<RVec> {
        (0..2 * n).map(|i| (0..2 * n).map(|j| if i != j { int(0) } else if i < n { int(1) } else { -t.clone() }).collect()).collect()
    };
    let relevant: Vec<usize> = (n..2 * n).collect();
    let ok = |t: f64| map.normal_cone.pieces().iter().all(|k| !matches!(form_sign(k, &form(&approx_f64(t, 1_000_000)), &relevant), FormSign::Negative(_)));
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn tilt_modulus_bounds_the_inverse_hessian_norm() {
    for name in ["quad-1d", "quad-diag12", "quad-coupled", "quad-3d"] {
        let f = corpus().into_iter().find(|f| f.name == name).unwrap();
        let i = &f.instance;
        let kappa = match genhess::regularity::tilt_stability_verdict(i).unwrap().verdict {
            TiltVerdict::Stable { kappa } => kappa,
            v => panic!("{name}: {v:?}"),
        };
        let map = HessianMap::new(&i.f, &i.xbar, &i.xstar).unwrap();
        let product = kappa * min_ratio_squared(&map).sqrt();
        assert!((product - 1.0).abs() <= 0.05, "{name}: κ̂ = {kappa}, product {product}");
    }
}

#[test]
fn escalations_render_without_failing() {
    let mut r = SuiteResult::new("PROBE", "probe", vec![Check::verified("requested number of instances generated", true, "1 of 1")], vec![]);
    r.escalations.push(Escalation {
        instance: serde_json::json!({"xbar": ["0"]}),
        metric_modulus: serde_json::json!(2.5),
        witness: serde_json::json!({"points": [[0.1], [-0.1]]}),
        note: "instance 1: candidate".into(),
    });
    let report = Report::new(ReportKind::Probe, vec![r]);
    assert_eq!(report.exit_code(), 0);
    assert_eq!(report.summary.escalations, 1);
    let md = report.render(Format::Markdown);
    assert!(md.contains("## Escalations") && md.contains("not failures") && md.contains("instance 1: candidate"), "{md}");
    let v: serde_json::Value = serde_json::from_str(&report.render(Format::Json)).unwrap();
    assert_eq!(v["results"][0]["escalations"][0]["metric_modulus"], 2.5);
}

fn status() -> impl Strategy<Value = Status> {
    prop_oneof![Just(Status::Pass), Just(Status::NoCounterexampleOnGrid), Just(Status::Skipped), Just(Status::Fail)]
}

fn check_with(s: Status) -> Check {
    match s {
        Status::Pass => Check::verified("c", true, ""),
        Status::Fail => Check::verified("c", false, ""),
        Status::Skipped => Check::skipped("c", ""),
        Status::NoCounterexampleOnGrid => Check::grid("c", GridVerdict::NoCounterexampleOnGrid, ""),
    }
}

proptest! {
    #[test]
    fn grid_checks_never_pass(fails in any::<bool>(), name in "[a-z ]{0,12}") {
        let v = if fails { GridVerdict::Fails } else { GridVerdict::NoCounterexampleOnGrid };
        prop_assert_ne!(Check::grid(name, v, "").status(), Status::Pass);
    }

    #[test]
    fn overall_status_follows_precedence(statuses in prop::collection::vec(status(), 0..8)) {
        let checks: Vec<Check> = statuses.iter().map(|s| check_with(*s)).collect();
        let want = if statuses.contains(&Status::Fail) {
            Status::Fail
        } else if statuses.contains(&Status::NoCounterexampleOnGrid) {
            Status::NoCounterexampleOnGrid
        } else if !statuses.is_empty() && statuses.iter().all(|s| *s == Status::Skipped) {
            Status::Skipped
        } else {
            Status::Pass
        };
        prop_assert_eq!(overall(&checks), want);
        let report = Report::new(ReportKind::Verify, vec![SuiteResult::new("X", "x", checks, vec![])]);
        prop_assert_eq!(report.exit_code(), i32::from(want == Status::Fail));
    }
}
