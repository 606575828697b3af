//! The suite registry.
//!
//! Suites are consistency checks between independently computed quantities
//! (a tilt verdict against a definiteness verdict, a growth check against a
//! modulus estimate) rather than re-proofs. Each suite also asserts the
//! expected entries of every fixture it touches.

use std::thread;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use genhess::hessian::{pair_form, second_order_subdifferential, Definiteness, HessianMap};
use genhess::model::ProblemInstance;
use genhess::polygeom::forms::{form_sign, FormSign};
use genhess::polygeom::{critical_cone, unions_equal, ConvexPolyhedron, PolyCone};
use genhess::rational::{approx_f64, dot, fmt_rat, frac, int, mat_vec, rvec, RVec, Rat};
use genhess::regularity::grid::rational_radius;
use genhess::regularity::{
    check_combined_lower_bound, check_growth, check_lower_prox_inequality, check_uniform_growth, solve_tilt, GridVerdict, GrowthMode,
    ProxMode, TiltVerdict,
};
use genhess::subdiff::exact_inverse_image;

use crate::facts::{definiteness_json, kernel_and_semidefinite, Facts};
use crate::fixtures::{corpus, Provenance};
use crate::oracle;
use crate::outcome::{Artifact, Check, SuiteResult};

/// Required gap below 1 for r̂·κ̂ products before a fixture counts as meeting
/// an "r < 1/κ" hypothesis. Sampled r̂ carries the check tolerance, so a
/// borderline product of exactly 1 can read as slightly less.
pub const PRODUCT_MARGIN: f64 = 0.95;
/// Modulus inflation applied before checking a bound that holds at the true modulus.
pub const MODULUS_SLACK: f64 = 1.05;
/// Floor on moduli so that a near-zero estimate does not produce a degenerate check.
const MODULUS_FLOOR: f64 = 1e-2;
/// Moduli used to spot-check that a condition fails for every modulus.
const SPOT_MODULI: [f64; 3] = [1.0, 10.0, 100.0];
/// Radius factor for the second look at a condition that must fail in every neighborhood.
const SHRINK: f64 = 0.1;
/// Growth constants below this are indistinguishable from the check tolerance.
const ALPHA_FLOOR: f64 = 1e-6;
/// Seed of the sampled normal-cone oracle.
pub const ORACLE_SEED: u64 = 0x6e6f726d;

/// Fixtures with their lazily computed facts.
pub struct Corpus {
    facts: Vec<Facts>,
}

impl Corpus {
    pub fn load() -> Self {
        Corpus { facts: corpus().into_iter().map(Facts::new).collect() }
    }

    pub fn facts(&self) -> &[Facts] {
        &self.facts
    }

    pub fn get(&self, name: &str) -> Option<&Facts> {
        self.facts.iter().find(|f| f.name() == name)
    }

    fn exact(&self) -> impl Iterator<Item = &Facts> {
        self.facts.iter().filter(|f| f.fixture.is_exact())
    }
}

impl Default for Corpus {
    fn default() -> Self {
        Corpus::load()
    }
}

/// Checks and artifacts being collected by one suite.
#[derive(Default)]
struct Run {
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
    touched: Vec<&'static str>,
}

impl Run {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn artifact(&mut self, fixture: &str, name: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.artifacts.push(Artifact { fixture: fixture.into(), name: name.into(), value });
    }

    fn touch(&mut self, f: &Facts) {
        if !self.touched.contains(&f.name()) {
            self.touched.push(f.name());
        }
    }

    /// Unwraps a fact or records the error as a failing check.
    fn need<T>(&mut self, name: &str, fixture: &str, r: Result<T, String>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(Check::error(name, e).on(fixture));
                None
            }
        }
    }

    fn finish(mut self, corpus: &Corpus, suite: &Suite) -> SuiteResult {
        for name in std::mem::take(&mut self.touched) {
            if let Some(f) = corpus.get(name) {
                self.checks.extend(f.expectation_checks());
            }
        }
        SuiteResult::new(suite.id, suite.title, self.checks, self.artifacts)
    }
}

pub struct Suite {
    pub id: &'static str,
    pub title: &'static str,
    run: fn(&Corpus, &mut Run),
}

pub const REGISTRY: &[Suite] = &[
    Suite { id: "EX4.14", title: "Indefinite generalized Hessian at a minimizer that is not tilt-stable", run: wedge_saddle },
    Suite { id: "EX3.4", title: "Quadratic growth with a non-isolated stationary point", run: oscillating_growth },
    Suite { id: "R4.8", title: "Metric regularity without strong metric regularity outside prox-regularity", run: crossing_axes },
    Suite { id: "SMOOTH", title: "Generalized Hessian of a quadratic is its Hessian", run: smooth_reduction },
    Suite { id: "T3.1", title: "Subregularity and growth measured by distance to the solution set", run: subregular_growth },
    Suite { id: "C3.3", title: "Strong subregularity and growth measured by distance to the reference point", run: strong_subregular_growth },
    Suite { id: "T3.7", title: "Uniform quadratic growth and strong metric regularity", run: uniform_growth },
    Suite { id: "C3.9", title: "Uniform prox-regular lower estimate under metric regularity", run: uniform_prox },
    Suite { id: "T4.6", title: "Tilt stability and positive-definite generalized Hessian", run: tilt_vs_definite },
    Suite { id: "T4.9", title: "Combined second-order subdifferential: modulus and lower bound", run: combined_bounds },
    Suite { id: "C4.10", title: "Combined second-order subdifferential: strong monotonicity", run: combined_monotone },
    Suite { id: "C4.11", title: "Pointwise modulus bound on the generalized Hessian", run: pointwise_bound },
    Suite { id: "T4.12", title: "Equivalent second-order conditions", run: equivalences },
    Suite { id: "ORACLE", title: "Normal cones against a sampled approximation", run: sampled_oracle },
];

pub fn suite_ids() -> Vec<&'static str> {
    REGISTRY.iter().map(|s| s.id).collect()
}

pub fn find(id: &str) -> Option<&'static Suite> {
    REGISTRY.iter().find(|s| s.id.eq_ignore_ascii_case(id))
}

#[derive(Debug)]
pub struct UnknownSuite(pub String);

impl std::fmt::Display for UnknownSuite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unknown suite id {:?}; known ids: {}", self.0, suite_ids().join(", "))
    }
}

impl std::error::Error for UnknownSuite {}

/// Resolves `all` or a single id to registry entries.
pub fn select(id: &str) -> Result<Vec<&'static Suite>, UnknownSuite> {
    if id.eq_ignore_ascii_case("all") {
        return Ok(REGISTRY.iter().collect());
    }
    find(id).map(|s| vec![s]).ok_or_else(|| UnknownSuite(id.into()))
}

pub fn run_suite(id: &str, corpus: &Corpus) -> Result<SuiteResult, UnknownSuite> {
    let s = find(id).ok_or_else(|| UnknownSuite(id.into()))?;
    Ok(s.execute(corpus))
}

impl Suite {
    pub fn execute(&self, corpus: &Corpus) -> SuiteResult {
        let mut run = Run::default();
        (self.run)(corpus, &mut run);
        run.finish(corpus, self)
    }
}

/// Runs suites on their own threads and returns results in the given order.
/// With `timings`, each result carries its wall-clock time.
pub fn run_suites(suites: &[&Suite], corpus: &Corpus, timings: bool) -> Vec<SuiteResult> {
    thread::scope(|scope| {
        let handles: Vec<_> = suites
            .iter()
            .map(|s| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let mut r = s.execute(corpus);
                    if timings {
                        r.runtime_ms = Some(t.elapsed().as_millis() as u64);
                    }
                    r
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    })
}

fn strs(v: &[Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Worked examples

fn wedge_saddle(c: &Corpus, run: &mut Run) {
    const NAME: &str = "wedge-saddle";
    let Some(f) = c.get(NAME) else {
        return run.check(Check::error("fixture", format!("{NAME} missing")));
    };
    run.touch(f);
    let i = &f.fixture.instance;
    let u = rvec(&[0, 1]);
    let ustar = rvec(&[0, -2]);
    match HessianMap::new(&i.f, &i.xbar, &i.xstar) {
        Ok(map) => run.check(
            Check::verified(
                "(0,-2) is in the generalized Hessian at (0,0) applied to (0,1)",
                map.contains(&u, &ustar),
                "exact membership of ((0,-2), -(0,1)) in the limiting normal cone to the graph of the subdifferential",
            )
            .on(NAME)
            .with_provenance(&Provenance::Reference),
        ),
        Err(e) => run.check(Check::error("generalized Hessian", e).on(NAME)),
    }
    let inner = dot(&ustar, &u);
    run.check(
        Check::verified("inner product of the witness pair is -2", inner == int(-2), format!("<(0,-2),(0,1)> = {}", fmt_rat(&inner)))
            .on(NAME)
            .with_provenance(&Provenance::Reference),
    );
    run.artifact(NAME, "witness pair", json!({"u": strs(&u), "ustar": strs(&ustar), "inner": fmt_rat(&inner)}));

    if let Some(h) = run.need("definiteness", NAME, f.hessian()) {
        let neg = h.witness.as_ref().is_some_and(|w| w.inner < Rat::from_integer(0.into()));
        run.check(
            Check::verified(
                "definiteness is indefinite",
                h.verdict == Definiteness::Indefinite && neg,
                format!("verdict {:?}, computed witness inner product {}", h.verdict, h.witness.as_ref().map(|w| fmt_rat(&w.inner)).unwrap_or("none".into())),
            )
            .on(NAME),
        );
        run.artifact(NAME, "definiteness", definiteness_json(&h));
    }

    if let Ok(e) = i.exact() {
        let piece = &e.domain().pieces()[0];
        match critical_cone(piece, &i.xbar, &i.xstar) {
            Ok(k) => {
                let omega = PolyCone::from_inequalities(2, piece.a().to_vec(), vec![]);
                run.check(Check::verified("critical cone equals the domain", k.set_eq(&omega), "x̄* = 0, so the critical cone is the tangent cone of the wedge").on(NAME));
            }
            Err(e) => run.check(Check::error("critical cone", e).on(NAME)),
        }
    }

    if let Some(t) = run.need("tilt stability", NAME, f.tilt()) {
        run.check(Check::verified("tilt stability verdict is unstable", !t.is_stable(), "argmin of the tilted function is not single-valued").on(NAME));
        run.artifact(NAME, "tilt verdict", &t.verdict);
    }
    match solve_tilt(i, &[0.0, 0.0]) {
        Ok(s) => {
            let values: Vec<f64> = s.minimizers.iter().filter_map(|m| i.f.evaluate(m).ok()).collect();
            let gap = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values.iter().cloned().fold(f64::INFINITY, f64::min);
            let gap = if values.is_empty() { f64::INFINITY } else { gap };
            run.check(
                Check::verified(
                    "argmin at tilt 0 has at least two points",
                    s.minimizers.len() >= 2,
                    format!("{} minimizers with optimal value {}", s.minimizers.len(), s.value),
                )
                .on(NAME)
                .with_provenance(&Provenance::Oracle("exact per-cell minimization of the tilted function")),
            );
            run.check(Check::verified("minimizers at tilt 0 share the optimal value", gap <= i.params.tol, format!("value gap {gap:e}")).on(NAME));
            run.check(
                Check::verified(
                    "argmin diameter at tilt 0 is at least 0.4",
                    s.diameter() >= 0.4,
                    format!("diameter {:.6} in the ball of radius γ = {}", s.diameter(), i.params.gamma),
                )
                .on(NAME),
            );
            run.artifact(NAME, "argmin at tilt 0", json!({"value": s.value, "minimizers": s.minimizers, "diameter": s.diameter()}));
        }
        Err(e) => run.check(Check::error("tilt at 0", e).on(NAME)),
    }
}

fn oscillating_growth(c: &Corpus, run: &mut Run) {
    const NAME: &str = "sin-inv";
    let Some(f) = c.get(NAME) else {
        return run.check(Check::error("fixture", format!("{NAME} missing")));
    };
    run.touch(f);
    if let Some(g) = run.need("growth", NAME, f.unit_growth()) {
        let ok = g.passed() && g.points >= 100_000 && g.tol <= 1e-9 && (g.eta - 0.05).abs() < 1e-15;
        run.check(
            Check::verified(
                "norm-squared growth with α = 1 on B_0.05(0)",
                ok,
                format!("{} violations on {} points, tolerance {:e}, η = {}", g.violation_count, g.points, g.tol, g.eta),
            )
            .on(NAME)
            .with_provenance(&Provenance::Reference),
        );
        run.artifact(NAME, "growth", &g);
    }
    if let Some(s) = run.need("stationary points", NAME, f.stationary_points()) {
        let smallest = s.iter().cloned().fold(f64::INFINITY, f64::min);
        run.check(
            Check::verified(
                "at least three stationary points in (0.001, 0.1)",
                s.len() >= 3,
                format!("{} sign changes of f′, smallest at {smallest:.6}", s.len()),
            )
            .on(NAME),
        );
        run.artifact(NAME, "stationary points", json!({"count": s.len(), "smallest": smallest, "first": s.iter().take(8).collect::<Vec<_>>()}));
    }
}

fn crossing_axes(c: &Corpus, run: &mut Run) {
    const NAME: &str = "cross-axes";
    let Some(f) = c.get(NAME) else {
        return run.check(Check::error("fixture", format!("{NAME} missing")));
    };
    run.touch(f);
    if let Some(m) = run.need("metric regularity modulus", NAME, f.metric()) {
        run.check(
            Check::verified(
                "metric regularity modulus converges to a finite value",
                m.converged && m.value.is_finite(),
                format!("κ̂ = {} over levels {:?}", m.value, m.levels),
            )
            .on(NAME)
            .with_provenance(&Provenance::Reference),
        );
        run.artifact(NAME, "metric regularity modulus", &m);
    }
    if let Some(l) = run.need("single-valued localization", NAME, f.localization()) {
        let w = l.witness.as_ref();
        let pair = w.filter(|w| w.points.len() == 2).map(|w| (norm(&w.points[0]) - norm(&w.points[1])).abs());
        let ok = l.verdict == GridVerdict::Fails && pair.is_some_and(|d| d <= 1e-9);
        run.check(
            Check::verified(
                "inverse localization is not single-valued",
                ok,
                match pair {
                    Some(d) => format!("two preimages of the witness value with ||a| - |b|| = {d:e}"),
                    None => "no two-point witness".into(),
                },
            )
            .on(NAME)
            .with_provenance(&Provenance::Reference),
        );
        if let Some(w) = w {
            run.artifact(NAME, "localization witness", w);
        }
    }
    if let Some(p) = run.need("prox-regularity", NAME, f.prox_regular()) {
        run.check(Check::verified("not prox-regular", !p, "exact prox-regularity test").on(NAME).with_provenance(&Provenance::Reference));
    }
}

fn smooth_reduction(c: &Corpus, run: &mut Run) {
    const NAME: &str = "quad-diag12";
    let Some(f) = c.get(NAME) else {
        return run.check(Check::error("fixture", format!("{NAME} missing")));
    };
    run.touch(f);
    let i = &f.fixture.instance;
    let Some(e) = run.need("exact function", NAME, i.exact().map_err(|e| e.to_string())) else { return };
    let q = &e.smooth().q;
    let dirs: Vec<RVec> = vec![
        rvec(&[1, 0]),
        rvec(&[0, 1]),
        rvec(&[1, 1]),
        rvec(&[1, -1]),
        rvec(&[-2, 1]),
        rvec(&[3, 5]),
        vec![frac(1, 2), frac(-1, 3)],
        vec![frac(-7, 4), int(2)],
        rvec(&[-1, -1]),
        vec![frac(5, 9), frac(11, 7)],
    ];
    for u in &dirs {
        let qu = mat_vec(q, u);
        let name = format!("∂²f(x̄,x̄*)({}) = {{Qu}}", strs(u).join(", "));
        match second_order_subdifferential(&i.f, &i.xbar, &i.xstar, u) {
            Ok(got) => {
                let eq: Vec<(RVec, Rat)> =
                    (0..u.len()).map(|k| ((0..u.len()).map(|j| if j == k { int(1) } else { int(0) }).collect(), qu[k].clone())).collect();
                let want = ConvexPolyhedron::from_system(u.len(), vec![], eq);
                run.check(
                    Check::verified(&name, unions_equal(&got, &[want]), format!("Qu = ({})", strs(&qu).join(", ")))
                        .on(NAME)
                        .with_provenance(&Provenance::Elementary),
                );
            }
            Err(e) => run.check(Check::error(&name, e).on(NAME)),
        }
    }
    if let Some(h) = run.need("definiteness", NAME, f.hessian()) {
        run.check(Check::verified("definiteness is positive definite", h.verdict == Definiteness::PositiveDefinite, format!("{:?}", h.verdict)).on(NAME));
    }
    if let Some(t) = run.need("tilt modulus", NAME, f.tilt()) {
        let (ok, d) = match t.verdict {
            TiltVerdict::Stable { kappa } => ((kappa - 1.0).abs() <= 0.05, format!("κ̂ = {kappa}")),
            TiltVerdict::Unstable { reason, .. } => (false, reason),
        };
        run.check(Check::verified("tilt modulus within 5% of 1", ok, d).on(NAME).with_provenance(&Provenance::Oracle("1/λ_min(Q)")));
    }
    if let Some(s) = run.need("subregularity modulus", NAME, f.subregularity()) {
        run.check(
            Check::verified("subregularity modulus within 5% of 1", (s.value - 1.0).abs() <= 0.05, format!("κ̂ = {}", s.value))
                .on(NAME)
                .with_provenance(&Provenance::Oracle("1/λ_min(Q)")),
        );
    }
}

// ---------------------------------------------------------------------------
// Growth and regularity

fn subregular_growth(c: &Corpus, run: &mut Run) {
    let mut rows = Vec::new();
    let mut qualifying = 0;
    for f in c.exact() {
        let name = f.name();
        run.touch(f);
        let i = &f.fixture.instance;
        let Some(s) = run.need("subregularity modulus", name, f.subregularity()) else { continue };
        if !(s.converged && s.value.is_finite() && s.value > 0.0) {
            rows.push(json!({"fixture": name, "kappa": s.value, "excluded": "modulus estimate not converged, infinite or zero"}));
            continue;
        }
        let kappa = s.value;
        let Some(base) = run.need("lower estimate", name, check_lower_prox_inequality(i, 0.0, ProxMode::BaseDistance).map_err(|e| e.to_string())) else {
            continue;
        };
        if base.required * kappa > PRODUCT_MARGIN {
            rows.push(json!({"fixture": name, "kappa": kappa, "r": base.required, "excluded": "no r with r·κ̂ ≤ 0.95"}));
            continue;
        }
        qualifying += 1;
        let alpha = 0.9 / kappa;
        let Some(g) = run.need("growth", name, check_growth(i, alpha, GrowthMode::DistanceSquared).map_err(|e| e.to_string())) else { continue };
        run.check(
            Check::verified(
                "distance-squared growth with α = 0.9/κ̂",
                g.passed() && g.tol <= 1e-9,
                format!("κ̂ = {kappa:.6}, r̂ = {:.6}, α = {alpha:.6}: {} violations on {} points", base.required, g.violation_count, g.points),
            )
            .on(name),
        );
        rows.push(json!({"fixture": name, "kappa": kappa, "r": base.required, "alpha": alpha, "violations": g.violation_count, "points": g.points}));
    }
    run.check(Check::verified("at least five qualifying fixtures", qualifying >= 5, format!("{qualifying} fixtures with converged κ̂ and r̂·κ̂ ≤ 0.95")));
    run.artifact("corpus", "qualification", rows);
}

/// Whether x̄ is an isolated point of (∂f)⁻¹(x̄*), decided exactly.
fn isolated(i: &ProblemInstance) -> Result<bool, String> {
    let e = i.exact().map_err(|e| e.to_string())?;
    let bbox = ConvexPolyhedron::cube(&i.xbar, &rational_radius(i.params.eta));
    let slice = exact_inverse_image(e, &i.xstar, &bbox);
    Ok(slice.pieces.iter().all(|p| !p.contains(&i.xbar) || p.affine_dim() == Some(0)))
}

fn strong_subregular_growth(c: &Corpus, run: &mut Run) {
    let (mut forward, mut converse) = (0, 0);
    let mut rows = Vec::new();
    for f in c.exact() {
        let name = f.name();
        run.touch(f);
        let i = &f.fixture.instance;
        let Some(iso) = run.need("isolated solution", name, isolated(i)) else { continue };
        let Some(g) = run.need("norm-squared growth", name, f.unit_growth()) else { continue };
        let Some(s) = run.need("subregularity modulus", name, f.subregularity()) else { continue };
        let alpha_hat = g.alpha_hat;
        let r_hat = (-alpha_hat).max(0.0);
        let mut row = json!({"fixture": name, "isolated": iso, "alpha_hat": alpha_hat, "kappa": s.value});
        // strong subregularity with r < 1/κ gives norm-squared growth with α = 0.9/κ̂
        if iso && s.converged && s.value.is_finite() && s.value > 0.0 && r_hat * s.value <= PRODUCT_MARGIN {
            forward += 1;
            let alpha = 0.9 / s.value;
            if let Some(g2) = run.need("norm-squared growth", name, check_growth(i, alpha, GrowthMode::NormSquared).map_err(|e| e.to_string())) {
                run.check(
                    Check::verified(
                        "norm-squared growth with α = 0.9/κ̂",
                        g2.passed(),
                        format!("κ̂ = {:.6}, α = {alpha:.6}: {} violations on {} points", s.value, g2.violation_count, g2.points),
                    )
                    .on(name),
                );
            }
        }
        // growth with α above the graph lower-estimate constant β isolates x̄
        if alpha_hat > ALPHA_FLOOR {
            if let Some(p) = run.need("graph lower estimate", name, check_lower_prox_inequality(i, 0.0, ProxMode::GraphNorm).map_err(|e| e.to_string())) {
                row["beta_hat"] = json!(p.required);
                if p.required < PRODUCT_MARGIN * alpha_hat {
                    converse += 1;
                    run.check(
                        Check::verified("x̄ is isolated in the solution set", iso, format!("β̂ = {:.6} < α̂ = {alpha_hat:.6}", p.required)).on(name),
                    );
                }
            }
        }
        rows.push(row);
    }
    run.check(Check::verified("both directions exercised", forward > 0 && converse > 0, format!("{forward} forward, {converse} converse")));
    run.artifact("corpus", "growth constants", rows);
}

fn uniform_growth(c: &Corpus, run: &mut Run) {
    let mut rows = Vec::new();
    for f in c.exact() {
        let name = f.name();
        let Some(member) = run.need("corpus membership", name, f.tilt_corpus_member()) else { continue };
        if !member && name != "cross-axes" {
            continue;
        }
        run.touch(f);
        let i = &f.fixture.instance;
        let Some(t) = run.need("tilt stability", name, f.tilt()) else { continue };
        match t.verdict {
            TiltVerdict::Stable { kappa } if member => {
                let m = f.metric().ok().filter(|m| m.converged && m.value.is_finite()).map(|m| m.value).unwrap_or(0.0);
                let k = MODULUS_SLACK * kappa.max(m).max(MODULUS_FLOOR);
                let Some(u) = run.need("uniform growth", name, check_uniform_growth(i, k).map_err(|e| e.to_string())) else { continue };
                run.check(Check::grid("uniform growth with 1/(2κ)", u.verdict, format!("κ = {k:.6} over {} values of u*", u.tested)).on(name));
                if let Some(l) = run.need("single-valued localization", name, f.localization()) {
                    run.check(Check::grid("single-valued Lipschitz localization", l.verdict, format!("Lipschitz estimate {:.6}", l.lipschitz)).on(name));
                }
                rows.push(json!({"fixture": name, "tilt": "stable", "kappa": k, "uniform_growth": u.verdict}));
            }
            _ => {
                let Some(u) = run.need("uniform growth", name, check_uniform_growth(i, 10.0).map_err(|e| e.to_string())) else { continue };
                run.check(
                    Check::verified(
                        "uniform growth fails at κ = 10",
                        u.verdict == GridVerdict::Fails,
                        match &u.counterexample {
                            Some(y) => format!("no admissible u for u* = {y:?}"),
                            None => "no counterexample found".into(),
                        },
                    )
                    .on(name),
                );
                rows.push(json!({"fixture": name, "tilt": "unstable", "kappa": 10.0, "uniform_growth": u.verdict, "counterexample": u.counterexample}));
            }
        }
    }
    run.artifact("corpus", "uniform growth", rows);
}

fn uniform_prox(c: &Corpus, run: &mut Run) {
    let mut rows = Vec::new();
    let mut qualifying = 0;
    let mut refuted = 0;
    for f in c.exact() {
        let name = f.name();
        run.touch(f);
        let i = &f.fixture.instance;
        let Some(m) = run.need("metric regularity modulus", name, f.metric()) else { continue };
        if !(m.converged && m.value.is_finite()) {
            rows.push(json!({"fixture": name, "kappa": m.value, "excluded": "modulus estimate not converged or infinite"}));
            continue;
        }
        let Some(p) = run.need("uniform lower estimate", name, check_lower_prox_inequality(i, 0.0, ProxMode::UniformProx).map_err(|e| e.to_string())) else {
            continue;
        };
        let product = p.required * m.value;
        let Some(l) = run.need("single-valued localization", name, f.localization()) else { continue };
        rows.push(json!({"fixture": name, "kappa": m.value, "r": p.required, "product": product, "localization": l.verdict}));
        if l.verdict == GridVerdict::Fails {
            // a failing localization rules out the lower estimate with r < 1/κ
            refuted += 1;
            run.check(
                Check::verified("no lower estimate with r̂·κ̂ ≤ 0.95 where the localization fails", product > PRODUCT_MARGIN, format!("r̂·κ̂ = {product:.6}"))
                    .on(name),
            );
        } else if product <= PRODUCT_MARGIN {
            qualifying += 1;
            run.check(Check::grid("single-valued Lipschitz localization", l.verdict, format!("κ̂ = {:.6}, r̂ = {:.6}", m.value, p.required)).on(name));
            if let Some(lm) = run.need("local minimizer", name, f.local_minimizer()) {
                run.check(Check::verified("x̄ is a local minimizer", lm, "exact test").on(name));
            }
        }
    }
    run.check(Check::verified("at least one qualifying fixture", qualifying > 0, format!("{qualifying} qualifying, {refuted} with failing localization")));
    run.artifact("corpus", "uniform lower estimate", rows);
}

// ---------------------------------------------------------------------------
// Second-order conditions on the tilt corpus

/// Members of the tilt corpus, plus exclusion reasons for the rest.
fn tilt_corpus<'a>(c: &'a Corpus, run: &mut Run) -> (Vec<&'a Facts>, Vec<Value>) {
    let mut members = Vec::new();
    let mut excluded = Vec::new();
    for f in c.facts() {
        let fx = &f.fixture;
        let reason = if !fx.is_exact() {
            Some("not piecewise quadratic".to_string())
        } else if fx.dim() > genhess::regularity::MAX_TILT_DIM {
            Some("dimension above the exact tilt solver limit".into())
        } else if !fx.xstar_is_zero() {
            Some("x̄* is not zero".into())
        } else {
            match (f.local_minimizer(), f.prox_regular()) {
                (Ok(false), _) => Some("x̄ is not a local minimizer".into()),
                (_, Ok(false)) => Some("not prox-regular".into()),
                (Err(e), _) | (_, Err(e)) => {
                    run.check(Check::error("corpus membership", &e).on(f.name()));
                    Some(e)
                }
                _ => None,
            }
        };
        match reason {
            Some(r) => excluded.push(json!({"fixture": f.name(), "reason": r})),
            None => members.push(f),
        }
    }
    (members, excluded)
}

fn tilt_vs_definite(c: &Corpus, run: &mut Run) {
    let (members, excluded) = tilt_corpus(c, run);
    for f in &members {
        run.touch(f);
        let (Some(t), Some(h)) = (run.need("tilt stability", f.name(), f.tilt()), run.need("definiteness", f.name(), f.hessian())) else { continue };
        let pd = h.verdict == Definiteness::PositiveDefinite;
        run.check(
            Check::verified("tilt-stable exactly when positive definite", t.is_stable() == pd, format!("tilt stable: {}, definiteness: {:?}", t.is_stable(), h.verdict))
                .on(f.name()),
        );
    }
    run.artifact("corpus", "excluded", excluded);
}

/// The same instance with the sampling radius η scaled by `factor`.
fn shrunk(i: &ProblemInstance, factor: f64) -> ProblemInstance {
    let mut j = i.clone();
    j.params.eta *= factor;
    j
}

fn tilt_kappa(f: &Facts, run: &mut Run) -> Option<Option<f64>> {
    let t = run.need("tilt stability", f.name(), f.tilt())?;
    Some(match t.verdict {
        TiltVerdict::Stable { kappa } => Some(kappa),
        TiltVerdict::Unstable { .. } => None,
    })
}

/// Shared shape of the combined-subdifferential suites: a bound at an inflated
/// modulus for stable fixtures, and violations within η and within η/10 at
/// every spot-check modulus for unstable ones. `r_of` maps a modulus to the lower-bound parameter.
fn combined(c: &Corpus, run: &mut Run, label: &str, r_of: fn(f64) -> f64, r_unstable: fn(f64) -> f64) {
    let (members, _) = tilt_corpus(c, run);
    for f in &members {
        run.touch(f);
        let name = f.name();
        let i = &f.fixture.instance;
        let Some(k) = tilt_kappa(f, run) else { continue };
        match k {
            Some(kappa) => {
                let k = MODULUS_SLACK * kappa.max(MODULUS_FLOOR);
                let r = r_of(k);
                let Some(rep) = run.need(label, name, check_combined_lower_bound(i, k, r).map_err(|e| e.to_string())) else { continue };
                run.check(
                    Check::verified(
                        format!("{label} holds for a tilt-stable minimizer"),
                        rep.passed,
                        format!("κ = {k:.6}, r = {r:.6}, {} graph points, {} violations", rep.tested, rep.violations.len()),
                    )
                    .on(name),
                );
            }
            None => {
                let mut details = Vec::new();
                let mut ok = true;
                for &k in &SPOT_MODULI {
                    let r = r_unstable(k);
                    for factor in [1.0, SHRINK] {
                        let j = shrunk(i, factor);
                        let Some(rep) = run.need(label, name, check_combined_lower_bound(&j, k, r).map_err(|e| e.to_string())) else {
                            ok = false;
                            continue;
                        };
                        ok &= !rep.passed;
                        details.push(format!(
                            "κ = {k}, η = {}: {}",
                            j.params.eta,
                            if rep.passed { "no violation".to_string() } else { format!("violated at {} or more graph points", rep.violations.len()) }
                        ));
                    }
                }
                run.check(Check::verified(format!("{label} fails when tilt stability fails"), ok, details.join("; ")).on(name));
            }
        }
    }
}

fn combined_bounds(c: &Corpus, run: &mut Run) {
    combined(c, run, "κ‖u*‖ ≥ ‖u‖ and ⟨u*,u⟩ ≥ -r‖u‖²", |_| 0.0, |k| 0.99 / k);
}

fn combined_monotone(c: &Corpus, run: &mut Run) {
    combined(c, run, "⟨u*,u⟩ ≥ (1/κ)‖u‖²", |k| -1.0 / k, |k| -1.0 / k);
}

/// Sign of the norm and inner-product forms on every piece of the limiting
/// graph normal cone, with modulus μ and parameter r. Returns the first
/// violating piece index and form.
fn pointwise_violation(map: &HessianMap, mu: f64, r: f64) -> Option<(usize, &'static str)> {
    let n = map.n;
    let m2 = approx_f64(mu * mu, 1_000_000_000);
    let norm_form: Vec<RVec> = (0..2 * n).map(|a| (0..2 * n).map(|b| if a != b { int(0) } else if a < n { m2.clone() } else { int(-1) }).collect()).collect();
    let inner_form = pair_form(n, &rational_radius(r), &int(0));
    let all: Vec<usize> = (0..2 * n).collect();
    for (k, cone) in map.normal_cone.pieces().iter().enumerate() {
        for (which, form) in [("norm", &norm_form), ("inner", &inner_form)] {
            if matches!(form_sign(cone, form, &all), FormSign::Negative(_)) {
                return Some((k, which));
            }
        }
    }
    None
}

fn pointwise_bound(c: &Corpus, run: &mut Run) {
    let (members, _) = tilt_corpus(c, run);
    for f in &members {
        run.touch(f);
        let name = f.name();
        let i = &f.fixture.instance;
        let Some(k) = tilt_kappa(f, run) else { continue };
        let Some(map) = run.need("generalized Hessian", name, HessianMap::new(&i.f, &i.xbar, &i.xstar).map_err(|e| e.to_string())) else { continue };
        match k {
            Some(kappa) => {
                let mu = MODULUS_SLACK * kappa.max(MODULUS_FLOOR);
                let v = pointwise_violation(&map, mu, 0.0);
                run.check(
                    Check::verified(
                        "μ‖u*‖ ≥ ‖u‖ and ⟨u*,u⟩ ≥ 0 on the generalized Hessian with μ = κ̂",
                        v.is_none(),
                        match v {
                            None => format!("μ = {mu:.6}, {} cone pieces", map.normal_cone.pieces().len()),
                            Some((p, w)) => format!("μ = {mu:.6}: {w} form negative on piece {p}"),
                        },
                    )
                    .on(name),
                );
            }
            None => {
                let found: Vec<String> = SPOT_MODULI
                    .iter()
                    .map(|&mu| match pointwise_violation(&map, mu, 0.99 / mu) {
                        Some((p, w)) => format!("μ = {mu}: {w} form negative on piece {p}"),
                        None => format!("μ = {mu}: no violation"),
                    })
                    .collect();
                let ok = found.iter().all(|s| !s.ends_with("no violation"));
                run.check(Check::verified("pointwise bound fails for every spot-check μ", ok, found.join("; ")).on(name));
            }
        }
    }
}

fn equivalences(c: &Corpus, run: &mut Run) {
    let (members, excluded) = tilt_corpus(c, run);
    let mut rows = Vec::new();
    for f in &members {
        run.touch(f);
        let name = f.name();
        let (Some(t), Some(h)) = (run.need("tilt stability", name, f.tilt()), run.need("definiteness", name, f.hessian())) else { continue };
        let tilt = t.is_stable();
        let pd = h.verdict == Definiteness::PositiveDefinite;
        let ks = kernel_and_semidefinite(&h);
        run.check(
            Check::verified(
                "tilt stable, positive definite, and trivial kernel with semidefinite agree",
                tilt == pd && pd == ks,
                format!("tilt {tilt}, positive definite {pd}, kernel trivial and semidefinite {ks}"),
            )
            .on(name),
        );
        rows.push(json!({
            "fixture": name,
            "tilt_stable": tilt,
            "positive_definite": pd,
            "kernel_trivial_and_semidefinite": ks,
            "definiteness": h.verdict,
        }));
    }
    run.check(Check::verified("corpus has at least ten fixtures", members.len() >= 10, format!("{} fixtures", members.len())));
    run.artifact("corpus", "verdicts", rows);
    run.artifact("corpus", "excluded", excluded);
}

fn sampled_oracle(c: &Corpus, run: &mut Run) {
    for (k, name) in oracle::DESIGNATED.iter().enumerate() {
        let Some(f) = c.get(name) else {
            run.check(Check::error("fixture", format!("{name} missing")));
            continue;
        };
        run.touch(f);
        let Some(cmp) = run.need("sampled normal cones", name, oracle::compare_fixture(&f.fixture, oracle::DEFAULT_SAMPLES, ORACLE_SEED + k as u64)) else {
            continue;
        };
        for o in cmp {
            run.check(
                Check::verified(
                    format!("{} normal cone matches {} samples", o.object, o.samples),
                    o.agrees(),
                    format!(
                        "{} sampled cones vs {} exact, mutual cover {}/{}, Hausdorff {:e}",
                        o.sampled_cones, o.exact_cones, o.sampled_covers_exact, o.exact_covers_sampled, o.hausdorff
                    ),
                )
                .on(name)
                .with_provenance(&Provenance::Oracle("projection sampling of regular normals")),
            );
            run.artifact(name, &format!("{} oracle", o.object), &o);
        }
    }
}
