//! The fixture corpus: problem files plus the claims each one is expected to satisfy.

use std::collections::BTreeMap;

use serde::Serialize;

use genhess::hessian::Definiteness;
use genhess::model::{parse_problem, ProblemInstance};

/// Where an expected value comes from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "source", content = "oracle", rename_all = "kebab-case")]
pub enum Provenance {
    /// Stated for this function in the reference literature.
    Reference,
    /// Immediate from the definitions.
    Elementary,
    /// Computed by the named independent oracle and frozen.
    Oracle(&'static str),
}

impl Provenance {
    pub fn tag(&self) -> String {
        match self {
            Provenance::Reference => "reference".into(),
            Provenance::Elementary => "elementary".into(),
            Provenance::Oracle(o) => format!("oracle: {o}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    LocalMinimizer,
    ProxRegular,
    Definiteness,
    KernelTrivial,
    TiltStable,
    TiltModulus,
    SubregularityModulus,
    MetricRegularity,
    MetricModulus,
    StrongRegularity,
    UnitNormGrowth,
    StationaryPoints,
}

impl Claim {
    pub fn name(self) -> &'static str {
        match self {
            Claim::LocalMinimizer => "local-minimizer",
            Claim::ProxRegular => "prox-regular",
            Claim::Definiteness => "definiteness",
            Claim::KernelTrivial => "kernel-trivial",
            Claim::TiltStable => "tilt-stable",
            Claim::TiltModulus => "tilt-modulus",
            Claim::SubregularityModulus => "subregularity-modulus",
            Claim::MetricRegularity => "metric-regularity",
            Claim::MetricModulus => "metric-modulus",
            Claim::StrongRegularity => "strong-regularity",
            Claim::UnitNormGrowth => "unit-norm-growth",
            Claim::StationaryPoints => "stationary-points",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ExpectedValue {
    Bool { value: bool },
    Definiteness { value: Definiteness },
    /// |computed − value| ≤ tol, or ≤ tol·|value| when `relative`.
    Approx { value: f64, tol: f64, relative: bool },
    AtLeast { value: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub value: ExpectedValue,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
    pub instance: ProblemInstance,
    pub expected: BTreeMap<Claim, Expected>,
}

impl Fixture {
    pub fn expects(&self, c: Claim) -> Option<&Expected> {
        self.expected.get(&c)
    }

    pub fn is_exact(&self) -> bool {
        self.instance.f.as_exact().is_ok()
    }

    pub fn dim(&self) -> usize {
        self.instance.f.dim()
    }

    pub fn xstar_is_zero(&self) -> bool {
        self.instance.xstar.iter().all(num::Zero::is_zero)
    }
}

use Provenance::{Elementary, Oracle, Reference};

fn b(v: bool, p: Provenance) -> Expected {
    Expected { value: ExpectedValue::Bool { value: v }, provenance: p }
}

fn def(d: Definiteness, p: Provenance) -> Expected {
    Expected { value: ExpectedValue::Definiteness { value: d }, provenance: p }
}

/// Within 5% of `v`.
fn near(v: f64, p: Provenance) -> Expected {
    Expected { value: ExpectedValue::Approx { value: v, tol: 0.05, relative: true }, provenance: p }
}

fn abs(v: f64, tol: f64, p: Provenance) -> Expected {
    Expected { value: ExpectedValue::Approx { value: v, tol, relative: false }, provenance: p }
}

fn at_least(v: usize, p: Provenance) -> Expected {
    Expected { value: ExpectedValue::AtLeast { value: v }, provenance: p }
}

const PD: Definiteness = Definiteness::PositiveDefinite;
const PSD: Definiteness = Definiteness::PositiveSemidefiniteDegenerate;
const IND: Definiteness = Definiteness::Indefinite;

struct Entry {
    name: &'static str,
    description: &'static str,
    source: &'static str,
    expected: Vec<(Claim, Expected)>,
}

macro_rules! fixture_file {
    ($name:literal) => {
        ($name, include_str!(concat!("../fixtures/", $name, ".json")))
    };
}

/// Problem files shipped with the crate, by name.
pub const FILES: &[(&str, &str)] = &[
    fixture_file!("quad-1d"),
    fixture_file!("quad-diag12"),
    fixture_file!("quad-coupled"),
    fixture_file!("quad-3d"),
    fixture_file!("halfspace-3d"),
    fixture_file!("half-line-quad"),
    fixture_file!("half-line-linear"),
    fixture_file!("orthant-quad"),
    fixture_file!("orthant-linear"),
    fixture_file!("halfplane-linear"),
    fixture_file!("wedge-bowl"),
    fixture_file!("wedge-saddle"),
    fixture_file!("orthant-bilinear"),
    fixture_file!("degenerate-vertex"),
    fixture_file!("flat-valley"),
    fixture_file!("cross-axes"),
    fixture_file!("reentrant-corner"),
    fixture_file!("complementarity-quad"),
    fixture_file!("neg-quad"),
    fixture_file!("saddle"),
    fixture_file!("sin-inv"),
];

fn entries() -> Vec<Entry> {
    use Claim::*;
    let min_pr = |p: Provenance| vec![(LocalMinimizer, b(true, p.clone())), (ProxRegular, b(true, p))];
    let mut v = vec![
        Entry {
            name: "quad-1d",
            description: "½x² on R",
            source: "smooth quadratic",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Elementary)),
                    (KernelTrivial, b(true, Elementary)),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("closed-form argmin t"))),
                    (SubregularityModulus, near(1.0, Elementary)),
                    (StrongRegularity, b(true, Elementary)),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "quad-diag12",
            description: "½xᵀdiag(1,2)x on R²",
            source: "smooth quadratic",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Elementary)),
                    (KernelTrivial, b(true, Elementary)),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("closed-form argmin Q⁻¹t, Lipschitz constant ‖Q⁻¹‖"))),
                    (SubregularityModulus, near(1.0, Oracle("sup ‖x‖/‖Qx‖ = 1/λ_min"))),
                    (MetricRegularity, b(true, Elementary)),
                    (MetricModulus, near(1.0, Oracle("sup ‖x − Q⁻¹y‖/‖Qx − y‖ = 1/λ_min"))),
                    (StrongRegularity, b(true, Elementary)),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "quad-coupled",
            description: "½xᵀ[[2,1],[1,2]]x on R²",
            source: "smooth quadratic",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Elementary)),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("eigenvalues 1 and 3, ‖Q⁻¹‖ = 1"))),
                    (SubregularityModulus, near(1.0, Oracle("eigenvalues 1 and 3, ‖Q⁻¹‖ = 1"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "quad-3d",
            description: "½xᵀdiag(1,2,4)x on R³",
            source: "smooth quadratic",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Elementary)),
                    (KernelTrivial, b(true, Elementary)),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("closed-form argmin Q⁻¹t"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "halfspace-3d",
            description: "½xᵀdiag(1,2,4)x on {x₃ ≥ 0}",
            source: "quadratic over a half-space",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Oracle("separable graph: lines in x₁, x₂ and a kinked line in x₃"))),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("separable argmin (t₁, t₂/2, max(t₃,0)/4)"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "half-line-quad",
            description: "½x² + δ[0,∞)",
            source: "one-sided quadratic",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Oracle("graph = ray {(x,x)} ∪ ray {(0,v): v ≤ 0}, normals computed by hand"))),
                    (KernelTrivial, b(true, Oracle("same hand computation"))),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("argmin max(t,0)"))),
                    (SubregularityModulus, near(1.0, Oracle("(∂f)⁻¹(0) = {0} and d(0,∂f(x)) = x"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "half-line-linear",
            description: "x + δ[0,∞), a sharp minimum",
            source: "one-sided linear",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Oracle("graph is the vertical line {0}×R near (0,0)"))),
                    (KernelTrivial, b(true, Oracle("graph is the vertical line {0}×R near (0,0)"))),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, abs(0.0, 1e-9, Oracle("argmin stays at 0 while 1 − t > 0"))),
                    (SubregularityModulus, abs(0.1, 1e-9, Oracle("d(x,{0})/d(0,∂f(x)) = x/1, sup over (0,η] is η"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "orthant-quad",
            description: "½‖x‖² + δ(R²₊)",
            source: "convex quadratic over a cone",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Oracle("product of two half-line-quad graphs"))),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("argmin = projection of t onto R²₊"))),
                    (SubregularityModulus, near(1.0, Oracle("product of two half-line-quad moduli"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "orthant-linear",
            description: "x₁ + x₂ + δ(R²₊), a sharp vertex minimum",
            source: "linear over a cone",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Oracle("graph is {0}×(vertex normal cone shifted), normals have u = 0"))),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, abs(0.0, 1e-9, Oracle("argmin stays at the vertex for small tilts"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "halfplane-linear",
            description: "x₁ + ½x₂² + δ{x₁ ≥ 0}",
            source: "linear-quadratic over a half-plane",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Oracle("graph {(0,x₂,y₁,x₂)}: ⟨u*,u⟩ = u₂² with u₁ = 0"))),
                    (KernelTrivial, b(true, Oracle("same hand computation"))),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("argmin (0, t₂)"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "wedge-bowl",
            description: "½‖x‖² over the wedge Ω = {−x₁+x₂ ≤ 0, −x₁−x₂ ≤ 0}",
            source: "convex quadratic over a cone",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PD, Oracle("argmin is the projection onto Ω, strongly monotone subdifferential"))),
                    (TiltStable, b(true, Elementary)),
                    (TiltModulus, near(1.0, Oracle("projection onto a convex cone is 1-Lipschitz and the identity on Ω"))),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "wedge-saddle",
            description: "(x₁² − x₂²) + δΩ, the indefinite generalized Hessian example",
            source: "reference example with an indefinite generalized Hessian",
            expected: vec![
                (LocalMinimizer, b(true, Reference)),
                (ProxRegular, b(true, Elementary)),
                (Definiteness, def(IND, Reference)),
                (TiltStable, b(false, Oracle("per-cell exact solve: f ≥ 0 on Ω, = 0 on both boundary rays"))),
                (StrongRegularity, b(false, Oracle("(∂f)⁻¹(0) contains both boundary ray segments"))),
            ],
        },
        Entry {
            name: "orthant-bilinear",
            description: "x₁x₂ + δ(R²₊)",
            source: "bilinear complementarity objective",
            expected: [
                min_pr(Elementary),
                vec![(TiltStable, b(false, Oracle("at tilt 0 the argmin is both axis segments")))],
            ]
            .concat(),
        },
        Entry {
            name: "degenerate-vertex",
            description: "x₁ + δ(R²₊), a minimum along a whole edge",
            source: "linear over a cone, degenerate multiplier",
            expected: [
                min_pr(Elementary),
                vec![(TiltStable, b(false, Oracle("at tilt 0 the argmin is the segment {0}×[0,γ]")))],
            ]
            .concat(),
        },
        Entry {
            name: "flat-valley",
            description: "½x₁² on R²",
            source: "singular smooth quadratic",
            expected: [
                min_pr(Elementary),
                vec![
                    (Definiteness, def(PSD, Elementary)),
                    (KernelTrivial, b(false, Elementary)),
                    (TiltStable, b(false, Elementary)),
                    (SubregularityModulus, near(1.0, Oracle("(∂f)⁻¹(0) = {x₁ = 0}, d = |x₁| = ‖∇f‖"))),
                    (MetricRegularity, b(false, Elementary)),
                ],
            ]
            .concat(),
        },
        Entry {
            name: "cross-axes",
            description: "x₁² + x₂² + δ{x₁x₂ = 0}",
            source: "reference example: metrically but not strongly metrically regular",
            expected: vec![
                (LocalMinimizer, b(true, Elementary)),
                (ProxRegular, b(false, Reference)),
                (MetricRegularity, b(true, Reference)),
                (MetricModulus, near(0.5, Oracle("per-axis preimages (y₁/2,0), (0,y₂/2) give ratio ½"))),
                (StrongRegularity, b(false, Reference)),
                (TiltStable, b(false, Oracle("per-axis minimization ties at tilts (a,a)"))),
            ],
        },
        Entry {
            name: "reentrant-corner",
            description: "½‖x‖² + δ({x₁ ≤ 0} ∪ {x₂ ≤ 0})",
            source: "nonconvex union with a reentrant corner",
            expected: vec![
                (LocalMinimizer, b(true, Elementary)),
                (ProxRegular, b(false, Oracle("u = (0,s), u* = u + (λ,0), x = (a,0) violates the prox inequality for a < 2λ/(1+r)"))),
            ],
        },
        Entry {
            name: "complementarity-quad",
            description: "½‖x‖² + δ{x ≥ 0, x₁x₂ = 0}",
            source: "complementarity set",
            expected: vec![
                (LocalMinimizer, b(true, Elementary)),
                (ProxRegular, b(false, Oracle("same violation as reentrant-corner along the x₂ ray"))),
            ],
        },
        Entry {
            name: "neg-quad",
            description: "−½x² on R",
            source: "smooth concave quadratic",
            expected: vec![
                (LocalMinimizer, b(false, Elementary)),
                (ProxRegular, b(true, Elementary)),
                (Definiteness, def(IND, Elementary)),
            ],
        },
        Entry {
            name: "saddle",
            description: "½xᵀdiag(1,−1)x on R²",
            source: "smooth saddle",
            expected: vec![
                (LocalMinimizer, b(false, Elementary)),
                (ProxRegular, b(true, Elementary)),
                (Definiteness, def(IND, Elementary)),
            ],
        },
        Entry {
            name: "sin-inv",
            description: "½x − x²sin(1/x) for x > 0, 0 at 0, +∞ for x < 0",
            source: "reference example: quadratic growth without isolated stationarity",
            expected: vec![
                (UnitNormGrowth, b(true, Reference)),
                (StationaryPoints, at_least(3, Oracle("bracketing sign changes of f′ on (0.001, 0.1)"))),
            ],
        },
    ];
    v.sort_by_key(|e| FILES.iter().position(|(n, _)| *n == e.name).unwrap_or(usize::MAX));
    v
}

/// All fixtures in registry order.
pub fn corpus() -> Vec<Fixture> {
    entries()
        .into_iter()
        .map(|e| {
            let text = FILES.iter().find(|(n, _)| *n == e.name).map(|(_, t)| *t).expect("fixture file registered");
            let instance = parse_problem(text).unwrap_or_else(|err| panic!("fixture {} does not load: {err}", e.name));
            Fixture { name: e.name, description: e.description, source: e.source, instance, expected: e.expected.into_iter().collect() }
        })
        .collect()
}

pub fn fixture(name: &str) -> Option<Fixture> {
    corpus().into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_file_has_an_entry_and_loads() {
        let c = corpus();
        assert_eq!(c.len(), FILES.len());
        let mut names: Vec<_> = c.iter().map(|f| f.name).collect();
        names.dedup();
        assert_eq!(names.len(), FILES.len());
        assert!(c.iter().all(|f| !f.expected.is_empty()));
    }

    #[test]
    fn oracle_entries_name_their_oracle() {
        for f in corpus() {
            for e in f.expected.values() {
                if let Provenance::Oracle(o) = &e.provenance {
                    assert!(!o.is_empty(), "{}", f.name);
                }
            }
        }
    }
}
