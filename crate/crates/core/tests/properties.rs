use proptest::prelude::*;

use genhess::hessian::{
    combined_second_order, definiteness, hessian_sum_rule_check, pair_form, probe_directions, second_order_subdifferential, Definiteness, HessianMap,
};
use genhess::model::{analytic_fixture, regularize, ExactFunction, FunctionSpec, Params, ProblemInstance, QuadraticForm};
use genhess::polygeom::{
    limiting_normal_cone, normal_cone_convex, polyhedra_cover, regular_normal_cone, union_covers, unions_equal, ConvexPolyhedron, PolyCone, PolyUnion,
};
use genhess::polygeom::forms::{form_sign, FormSign};
use genhess::rational::{frac, int, mat_vec, scale, unit, vec_f64, zeros, RVec};
use genhess::regularity::{check_growth, estimate_subregularity_modulus, tilt_stability_verdict, GrowthMode, TiltVerdict};
use genhess::subdiff::{distance_to_inverse, frechet_subdifferential, inverse_image, sample_members, subdifferential, SubdiffError};

fn rv(xs: &[i64]) -> RVec {
    xs.iter().map(|&v| int(v)).collect()
}

fn row(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-2i64..=2, n).prop_filter("nonzero", |r| r.iter().any(|&x| x != 0))
}

/// A polyhedron given by 1–3 rows; `through_origin` forces b = 0.
fn polyhedron(n: usize, through_origin: bool) -> impl Strategy<Value = ConvexPolyhedron> {
    let b = if through_origin { 0i64..=0 } else { 0i64..=2 };
    prop::collection::vec((row(n), b), 1..=3)
        .prop_map(move |rows| {
            let (a, b): (Vec<_>, Vec<_>) = rows.into_iter().map(|(r, b)| (rv(&r), int(b))).unzip();
            ConvexPolyhedron::new(a, b, n).unwrap()
        })
        .prop_filter("nonempty", |p| !p.faces().is_empty())
}

fn union(n: usize, through_origin: bool) -> impl Strategy<Value = Vec<ConvexPolyhedron>> {
    prop::collection::vec(polyhedron(n, through_origin), 1..=2)
}

fn symmetric(n: usize) -> impl Strategy<Value = Vec<RVec>> {
    prop::collection::vec(-2i64..=2, n * n).prop_map(move |e| {
        let mut q = vec![zeros(n); n];
        for i in 0..n {
            for j in i..n {
                q[i][j] = int(e[i * n + j]);
                q[j][i] = int(e[i * n + j]);
            }
        }
        q
    })
}

/// Points on the half-integer lattice in [−2, 2]ⁿ.
fn point(n: usize) -> impl Strategy<Value = RVec> {
    prop::collection::vec(-4i64..=4, n).prop_map(|v| v.into_iter().map(|x| frac(x, 2)).collect())
}

fn function(q: Vec<RVec>, pieces: Vec<ConvexPolyhedron>) -> FunctionSpec {
    let n = q.len();
    let smooth = QuadraticForm::new(q, zeros(n), int(0)).unwrap();
    FunctionSpec::Exact(ExactFunction::new(smooth, PolyUnion::new(pieces).unwrap()).unwrap())
}

/// A piecewise quadratic with every piece through the origin.
fn conic_function() -> impl Strategy<Value = FunctionSpec> {
    (1usize..=2).prop_flat_map(|n| (symmetric(n), union(n, true))).prop_map(|(q, p)| function(q, p))
}

fn members_at_origin(f: &FunctionSpec) -> Vec<RVec> {
    let n = f.dim();
    sample_members(&subdifferential(f, &zeros(n)).unwrap())
}

fn cone_from(n: usize, rays: Vec<Vec<i64>>) -> PolyCone {
    PolyCone::from_generators(n, rays.iter().map(|r| rv(r)).collect(), vec![])
}

fn box_around_origin(n: usize) -> ConvexPolyhedron {
    ConvexPolyhedron::cube(&zeros(n), &int(3))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn value_is_finite_exactly_on_the_domain((f, x) in (1usize..=3).prop_flat_map(|n| (symmetric(n), union(n, false), point(n)))
        .prop_map(|(q, p, x)| (function(q, p), x))) {
        let e = f.as_exact().unwrap();
        let v = f.evaluate_exact(&x).unwrap();
        prop_assert_eq!(v.is_some(), e.domain().contains(&x));
        prop_assert_eq!(f.evaluate(&vec_f64(&x)).unwrap().is_finite(), e.domain().contains(&x));
    }

    #[test]
    fn regularizing_back_and_forth_is_the_identity((f, c, xs) in (1usize..=2).prop_flat_map(|n| (symmetric(n), union(n, false), point(n), prop::collection::vec(point(n), 4)))
        .prop_map(|(q, p, c, xs)| (function(q, p), c, xs)), t in 1i64..=5) {
        let theta = frac(t, 3);
        let g = regularize(&regularize(&f, &theta, &c).unwrap(), &-theta.clone(), &c).unwrap();
        for x in &xs {
            prop_assert_eq!(f.evaluate_exact(x).unwrap(), g.evaluate_exact(x).unwrap());
        }
    }

    #[test]
    fn analytic_derivatives_match_central_differences(x in 0.01f64..1.0, which in 0usize..2) {
        let a = analytic_fixture(["sin-inv", "half-square"][which]).unwrap();
        let h = 1e-6 * x;
        let fd = ((a.value)(x + h) - (a.value)(x - h)) / (2.0 * h);
        let d = (a.derivative)(x);
        prop_assert!((fd - d).abs() <= 1e-4 * (1.0 + d.abs() + 1.0 / x), "x = {x}: {fd} vs {d}");
    }

    #[test]
    fn polar_is_an_involution(c in (1usize..=3).prop_flat_map(|n| prop::collection::vec(row(n), 1..=4).prop_map(move |r| cone_from(n, r)))) {
        prop_assert!(c.polar().polar().set_eq(&c));
    }

    #[test]
    fn regular_normals_are_limiting_normals((pieces, x) in (1usize..=2).prop_flat_map(|n| (union(n, false), point(n)))) {
        let u = PolyUnion::new(pieces).unwrap();
        prop_assume!(u.contains(&x));
        let reg = regular_normal_cone(&u, &x).unwrap();
        let lim = limiting_normal_cone(&u, &x).unwrap();
        prop_assert!(union_covers(lim.pieces(), &[reg]));
    }

    #[test]
    fn convex_limiting_cone_is_the_normal_cone((p, x) in (1usize..=3).prop_flat_map(|n| (polyhedron(n, false), point(n)))) {
        prop_assume!(p.contains(&x));
        let lim = limiting_normal_cone(&PolyUnion::new(vec![p.clone()]).unwrap(), &x).unwrap();
        let nc = normal_cone_convex(&p, &x).unwrap();
        prop_assert!(union_covers(lim.pieces(), &[nc.clone()]) && union_covers(&[nc], lim.pieces()));
    }

    #[test]
    fn projections_satisfy_kkt((p, x) in (1usize..=3).prop_flat_map(|n| (polyhedron(n, false), prop::collection::vec(-3.0f64..3.0, n)))) {
        let y = p.project(&x).unwrap();
        prop_assert!(p.contains_f64(&y, 1e-9));
        prop_assert!(p.kkt_residual(&x, &y) <= 1e-10, "residual {}", p.kkt_residual(&x, &y));
    }

    #[test]
    fn frechet_subgradients_are_limiting((f, x) in (1usize..=2).prop_flat_map(|n| (symmetric(n), union(n, false), point(n)))
        .prop_map(|(q, p, x)| (function(q, p), x))) {
        prop_assume!(f.evaluate_exact(&x).unwrap().is_some());
        let lim = subdifferential(&f, &x).unwrap();
        for v in sample_members(&frechet_subdifferential(&f, &x).unwrap()) {
            prop_assert!(lim.contains(&v), "{v:?}");
        }
    }

    #[test]
    fn convex_functions_have_one_subdifferential((diag, p, x) in (1usize..=2).prop_flat_map(|n| (prop::collection::vec(0i64..=2, n), polyhedron(n, false), point(n)))) {
        prop_assume!(p.contains(&x));
        let f = FunctionSpec::Exact(ExactFunction::new(QuadraticForm::diagonal(&rv(&diag)), PolyUnion::new(vec![p]).unwrap()).unwrap());
        let lim = subdifferential(&f, &x).unwrap();
        let fr = frechet_subdifferential(&f, &x).unwrap();
        for v in sample_members(&lim) {
            prop_assert!(fr.contains(&v));
        }
        for v in sample_members(&fr) {
            prop_assert!(lim.contains(&v));
        }
    }

    #[test]
    fn inverse_image_is_adjoint_to_the_subdifferential((f, v, xs) in (1usize..=2).prop_flat_map(|n| (symmetric(n), union(n, false), point(n), prop::collection::vec(point(n), 6)))
        .prop_map(|(q, p, v, xs)| (function(q, p), v, xs))) {
        let bbox = box_around_origin(f.dim());
        let slice = inverse_image(&f, &v, &bbox).unwrap();
        for x in &xs {
            let member = f.evaluate_exact(x).unwrap().is_some() && subdifferential(&f, x).unwrap().contains(&v);
            prop_assert_eq!(slice.contains(x), member, "x = {:?}", x);
            let d = match distance_to_inverse(&f, &v, &vec_f64(x), &bbox) {
                Err(SubdiffError::EmptySlice) => f64::INFINITY,
                r => r.unwrap(),
            };
            prop_assert_eq!(d <= 1e-9, member, "x = {:?}, distance {}", x, d);
        }
    }

    #[test]
    fn smooth_functions_have_the_hessian_as_second_derivative((q, x, u) in (1usize..=3).prop_flat_map(|n| (symmetric(n), point(n), point(n)))) {
        let n = q.len();
        let f = FunctionSpec::Exact(ExactFunction::unconstrained(QuadraticForm::new(q.clone(), zeros(n), int(0)).unwrap()));
        let grad = mat_vec(&q, &x);
        let got = second_order_subdifferential(&f, &x, &grad, &u).unwrap();
        let qu = mat_vec(&q, &u);
        let want = ConvexPolyhedron::from_system(n, vec![], (0..n).map(|i| (unit(n, i), qu[i].clone())).collect());
        prop_assert!(unions_equal(&got, &[want]));
    }

    #[test]
    fn combined_second_derivative_is_limiting((f, u) in conic_function().prop_flat_map(|f| { let n = f.dim(); (Just(f), point(n)) })) {
        let n = f.dim();
        for v in members_at_origin(&f) {
            let map = HessianMap::new(&f, &zeros(n), &v).unwrap();
            if let Some(c) = combined_second_order(&f, &zeros(n), &v, &u).unwrap() {
                prop_assert!(polyhedra_cover(&map.query(&u), &[c]));
            }
        }
    }

    #[test]
    fn second_derivative_is_positively_homogeneous((f, u) in conic_function().prop_flat_map(|f| { let n = f.dim(); (Just(f), point(n)) })) {
        let n = f.dim();
        for v in members_at_origin(&f) {
            let map = HessianMap::new(&f, &zeros(n), &v).unwrap();
            for t in [int(2), frac(1, 3)] {
                for p in map.query(&u) {
                    let w = p.point().unwrap();
                    prop_assert!(map.contains(&scale(&t, &u), &scale(&t, &w)));
                }
                for p in map.query(&scale(&t, &u)) {
                    let w = p.point().unwrap();
                    prop_assert!(map.contains(&u, &scale(&t.recip(), &w)));
                }
            }
        }
    }

    #[test]
    fn sum_rule_holds(f in conic_function()) {
        let n = f.dim();
        for v in members_at_origin(&f) {
            prop_assert!(hessian_sum_rule_check(&f, &zeros(n), &v).unwrap());
        }
    }

    #[test]
    fn regularization_shifts_the_second_derivative((f, t) in (conic_function(), 1i64..=4)) {
        let n = f.dim();
        let theta = frac(t, 2);
        let g = regularize(&f, &theta, &zeros(n)).unwrap();
        for v in members_at_origin(&f) {
            let mf = HessianMap::new(&f, &zeros(n), &v).unwrap();
            let mg = HessianMap::new(&g, &zeros(n), &v).unwrap();
            for u in probe_directions(&mf) {
                let shifted: Vec<ConvexPolyhedron> = mf.query(&u).iter().map(|p| p.translate(&scale(&theta, &u))).collect();
                prop_assert!(unions_equal(&shifted, &mg.query(&u)), "u = {:?}", u);
            }
            // ⟨u* + θu, u⟩ on the graph of ∂²f is the pair form with r = θ.
            let s = pair_form(n, &theta, &int(0));
            let z: Vec<usize> = (n..2 * n).collect();
            let mut expected = Definiteness::PositiveDefinite;
            for k in mf.normal_cone.pieces() {
                match form_sign(k, &s, &z) {
                    FormSign::Negative(_) => expected = Definiteness::Indefinite,
                    FormSign::Zero(_) if expected == Definiteness::PositiveDefinite => expected = Definiteness::PositiveSemidefiniteDegenerate,
                    _ => {}
                }
            }
            prop_assert_eq!(definiteness(&g, &zeros(n), &v).unwrap().verdict, expected);
        }
    }
}

fn instance(q: Vec<RVec>, pieces: Vec<ConvexPolyhedron>) -> Option<ProblemInstance> {
    let n = q.len();
    let mut p = Params::default();
    p.grid = 12;
    ProblemInstance::new(function(q, pieces), zeros(n), zeros(n), p).ok()
}

fn small_instance() -> impl Strategy<Value = ProblemInstance> {
    (1usize..=2).prop_flat_map(|n| (symmetric(n), union(n, true))).prop_filter_map("0 ∈ ∂f(0)", |(q, p)| instance(q, p))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn modulus_levels_refine_monotonically(inst in small_instance()) {
        let m = estimate_subregularity_modulus(&inst).unwrap();
        for w in m.levels.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12) || w[1].is_infinite() || w[0].is_infinite(), "{:?}", m.levels);
        }
    }

    #[test]
    fn growth_holds_at_the_reported_constant(inst in small_instance()) {
        let g = check_growth(&inst, 1.0, GrowthMode::NormSquared).unwrap();
        prop_assume!(g.alpha_hat != f64::NEG_INFINITY);
        let a = if g.alpha_hat.is_finite() { g.alpha_hat - 1e-9 * (1.0 + g.alpha_hat.abs()) } else { 1e6 };
        let again = check_growth(&inst, a, GrowthMode::NormSquared).unwrap();
        prop_assert!(again.passed(), "alpha_hat {} has {} violations", g.alpha_hat, again.violation_count);
        prop_assert_eq!(again.alpha_hat, g.alpha_hat);
    }

    #[test]
    fn stable_tilts_have_unique_lipschitz_minimizers(inst in small_instance()) {
        let r = tilt_stability_verdict(&inst).unwrap();
        if let TiltVerdict::Stable { kappa } = r.verdict {
            let xbar = vec_f64(&inst.xbar);
            for s in &r.argmin_map {
                prop_assert_eq!(s.minimizers.len(), 1);
            }
            for a in &r.argmin_map {
                for b in &r.argmin_map {
                    let dt = dist(&a.tilt, &b.tilt);
                    if dt > 0.0 {
                        prop_assert!(dist(&a.minimizers[0], &b.minimizers[0]) <= kappa * dt * (1.0 + 1e-9) + 1e-12);
                    }
                }
            }
            let at_zero = r.argmin_map.iter().find(|s| s.tilt.iter().all(|t| *t == 0.0));
            if let Some(s) = at_zero {
                prop_assert!(dist(&s.minimizers[0], &xbar) <= 1e-9);
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
