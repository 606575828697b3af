//! Acceptance criteria, one line each, run without the libtest harness so
//! the lines are always printed. Criteria run one after another on a
//! fresh corpus so that cached facts do not hide their cost.

use std::time::{Duration, Instant};

use genhess::hessian::{second_order_subdifferential, Definiteness, HessianMap};
use genhess::polygeom::ConvexPolyhedron;
use genhess::rational::{dot, frac, int, mat_vec, rvec, unit, RVec};
use genhess::regularity::{GridVerdict, TiltVerdict};
use genhess_verifier::oracle::{compare_fixture, DEFAULT_SAMPLES, DESIGNATED, HAUSDORFF_TOL};
use genhess_verifier::outcome::Status;
use genhess_verifier::probe::conjecture_probe;
use genhess_verifier::suites::{run_suite, Corpus, ORACLE_SEED};

/// Tolerances and limits, fixed.
const GAP_TOL: f64 = 1e-9;
const DIAMETER_MIN: f64 = 0.4;
const PAIR_TOL: f64 = 1e-9;
const GROWTH_POINTS: usize = 100_000;
const GROWTH_TOL: f64 = 1e-9;
const GROWTH_ETA: f64 = 0.05;
const MODULUS_REL: f64 = 0.05;

struct Outcome {
    ok: bool,
    detail: String,
}

fn criterion(n: u32, what: &str, limit: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = body();
    let took = t.elapsed();
    let ok = o.ok && took <= limit;
    println!(
        "criterion {n}: {} | {what} | {} | {:.2} s of {} s",
        if ok { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn wedge_membership() -> Outcome {
    let c = Corpus::load();
    let f = c.get("wedge-saddle").expect("fixture");
    let i = &f.fixture.instance;
    let (u, ustar) = (rvec(&[0, 1]), rvec(&[0, -2]));
    let member = HessianMap::new(&i.f, &i.xbar, &i.xstar).map(|m| m.contains(&u, &ustar)).unwrap_or(false);
    let inner = dot(&ustar, &u);
    let verdict = f.hessian().map(|h| h.verdict);
    Outcome {
        ok: member && inner == int(-2) && verdict == Ok(Definiteness::Indefinite),
        detail: format!("member {member}, <u*,u> = {inner}, {verdict:?}"),
    }
}

fn wedge_tilt() -> Outcome {
    let c = Corpus::load();
    let f = c.get("wedge-saddle").expect("fixture");
    let i = &f.fixture.instance;
    let unstable = f.tilt().map(|t| matches!(t.verdict, TiltVerdict::Unstable { .. })).unwrap_or(false);
    let s = genhess::regularity::solve_tilt(i, &[0.0, 0.0]).expect("tilt solve");
    let values: Vec<f64> = s.minimizers.iter().map(|m| i.f.evaluate(m).unwrap()).collect();
    let gap = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values.iter().cloned().fold(f64::INFINITY, f64::min);
    let gamma_ok = i.params.gamma == 0.5;
    Outcome {
        ok: unstable && gamma_ok && s.minimizers.len() >= 2 && gap <= GAP_TOL && s.diameter() >= DIAMETER_MIN,
        detail: format!("unstable {unstable}, γ = {}, {} minimizers, gap {gap:e}, diameter {:.4}", i.params.gamma, s.minimizers.len(), s.diameter()),
    }
}

fn crossing_axes() -> Outcome {
    let c = Corpus::load();
    let f = c.get("cross-axes").expect("fixture");
    let m = f.metric().expect("metric modulus");
    let l = f.localization().expect("localization");
    let pair = l.witness.as_ref().filter(|w| w.points.len() == 2).map(|w| (norm(&w.points[0]) - norm(&w.points[1])).abs());
    Outcome {
        ok: m.converged && m.value.is_finite() && l.verdict == GridVerdict::Fails && pair.is_some_and(|d| d <= PAIR_TOL),
        detail: format!("κ̂ = {:.4} converged {}, localization {:?}, ||a|-|b|| = {pair:?}", m.value, m.converged, l.verdict),
    }
}

fn oscillating() -> Outcome {
    let c = Corpus::load();
    let f = c.get("sin-inv").expect("fixture");
    let g = f.unit_growth().expect("growth");
    let s = f.stationary_points().expect("stationary points");
    let inside = s.iter().filter(|x| **x > 0.001 && **x < 0.1).count();
    Outcome {
        ok: g.alpha == 1.0 && g.eta == GROWTH_ETA && g.tol <= GROWTH_TOL && g.points >= GROWTH_POINTS && g.violation_count == 0 && inside >= 3,
        detail: format!("α = {}, η = {}, {} violations on {} points, {inside} stationary points", g.alpha, g.eta, g.violation_count, g.points),
    }
}

fn smooth() -> Outcome {
    let c = Corpus::load();
    let f = c.get("quad-diag12").expect("fixture");
    let i = &f.fixture.instance;
    let q = &i.exact().unwrap().smooth().q;
    let dirs: Vec<RVec> = vec![
        rvec(&[1, 0]),
        rvec(&[0, 1]),
        rvec(&[2, 3]),
        rvec(&[-1, 4]),
        rvec(&[5, -5]),
        vec![frac(1, 3), frac(2, 7)],
        vec![frac(-3, 2), frac(1, 8)],
        rvec(&[-6, -1]),
        vec![frac(9, 10), int(-3)],
        rvec(&[7, 2]),
    ];
    let mut equal = 0;
    for u in &dirs {
        let qu = mat_vec(q, u);
        let want = ConvexPolyhedron::from_system(2, vec![], (0..2).map(|k| (unit(2, k), qu[k].clone())).collect());
        if second_order_subdifferential(&i.f, &i.xbar, &i.xstar, u).is_ok_and(|got| genhess::polygeom::unions_equal(&got, &[want])) {
            equal += 1;
        }
    }
    let pd = f.hessian().map(|h| h.verdict) == Ok(Definiteness::PositiveDefinite);
    let tilt = match f.tilt().expect("tilt").verdict {
        TiltVerdict::Stable { kappa } => kappa,
        TiltVerdict::Unstable { .. } => f64::INFINITY,
    };
    let sub = f.subregularity().expect("subregularity").value;
    Outcome {
        ok: equal == dirs.len() && pd && (tilt - 1.0).abs() <= MODULUS_REL && (sub - 1.0).abs() <= MODULUS_REL,
        detail: format!("{equal}/{} directions equal {{Qu}}, positive definite {pd}, tilt κ̂ = {tilt:.4}, subregularity κ̂ = {sub:.4}", dirs.len()),
    }
}

fn growth_from_subregularity() -> Outcome {
    let r = run_suite("T3.1", &Corpus::load()).expect("suite");
    let growth: Vec<_> = r.checks.iter().filter(|c| c.name().starts_with("distance-squared growth")).collect();
    let passed = growth.iter().filter(|c| c.status() == Status::Pass).count();
    Outcome {
        ok: r.status != Status::Fail && passed == growth.len() && passed >= 5,
        detail: format!("{passed}/{} qualifying fixtures grow, suite {}", growth.len(), r.status.label()),
    }
}

fn equivalence() -> Outcome {
    let r = run_suite("T4.12", &Corpus::load()).expect("suite");
    let agree: Vec<_> = r.checks.iter().filter(|c| c.name().starts_with("tilt stable, positive definite")).collect();
    let same = agree.iter().filter(|c| c.status() == Status::Pass).count();
    Outcome {
        ok: r.status != Status::Fail && same == agree.len() && same >= 10,
        detail: format!("{same}/{} fixtures with identical verdicts, suite {}", agree.len(), r.status.label()),
    }
}

fn oracle() -> Outcome {
    let c = Corpus::load();
    let mut worst: f64 = 0.0;
    let mut all = true;
    let mut compared = 0;
    for (k, name) in DESIGNATED.iter().enumerate() {
        let f = c.get(name).expect("fixture");
        for o in compare_fixture(&f.fixture, DEFAULT_SAMPLES, ORACLE_SEED + k as u64).expect("oracle") {
            compared += 1;
            worst = worst.max(o.hausdorff);
            all &= o.samples == 10_000 && o.agrees();
        }
    }
    Outcome {
        ok: all && worst <= HAUSDORFF_TOL && DESIGNATED.len() == 5,
        detail: format!("{compared} comparisons on {} fixtures, largest Hausdorff distance {worst:e}", DESIGNATED.len()),
    }
}

fn probe() -> Outcome {
    let out = conjecture_probe(1, 50);
    let s = &out.summary;
    Outcome {
        ok: s.generated == 50 && s.escalations == 0 && !out.result.failed(),
        detail: format!("{} generated, {} metrically regular, {} escalations", s.generated, s.metrically_regular, s.escalations),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "generalized Hessian of the saddle on a wedge", secs(5), wedge_membership),
        criterion(2, "tilt instability of the saddle on a wedge", secs(10), wedge_tilt),
        criterion(3, "crossing axes: metric regularity without strong regularity", secs(30), crossing_axes),
        criterion(4, "oscillating one-dimensional function", secs(10), oscillating),
        criterion(5, "smooth quadratic diag(1,2)", secs(10), smooth),
        criterion(6, "growth from subregularity and a lower estimate", secs(120), growth_from_subregularity),
        criterion(7, "tilt stability, positive definiteness and kernel test agree", secs(120), equivalence),
        criterion(8, "sampled normal-cone oracle", secs(120), oracle),
        criterion(9, "random probe, seed 1, 50 instances", secs(300), probe),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(k, _)| k + 1).collect();
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: {} of {} criteria pass", results.len(), results.len());
}
