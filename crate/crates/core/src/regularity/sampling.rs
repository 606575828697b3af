//! Shared plumbing: function values relative to the reference pair, inverse
//! slices in boxes, and exact samples of the subdifferential graph.

use std::collections::BTreeSet;

use num::Signed;

use super::grid::{rational_radius, Lattice};
use super::RegularityError;
use crate::model::{AnalyticFixture1D, ExactFunction, FunctionSpec, ProblemInstance};
use crate::polygeom::ConvexPolyhedron;
use crate::rational::{add, dot, from_f64, sub, to_f64, vec_f64, RVec, Rat};
use crate::subdiff::{exact_inverse_image, roots_1d, subdifferential, subgradient_cones, InverseSlice};

pub(crate) struct ExactCtx<'a> {
    pub e: &'a ExactFunction,
    pub xbar: &'a [Rat],
    pub xstar: &'a [Rat],
    pub fbar: Rat,
}

/// A point `(u, u*)` of gph ∂f with exact coordinates.
#[derive(Clone, Debug)]
pub(crate) struct GraphSample {
    pub u: RVec,
    pub ustar: RVec,
}

impl<'a> ExactCtx<'a> {
    pub fn new(inst: &'a ProblemInstance) -> Result<Self, RegularityError> {
        let e = inst.f.as_exact().map_err(|_| RegularityError::NeedsExact)?;
        let fbar = e.value(&inst.xbar).ok_or(RegularityError::EmptyFeasibleSet)?;
        Ok(ExactCtx { e, xbar: &inst.xbar, xstar: &inst.xstar, fbar })
    }

    pub fn lattice(&self, center: &[Rat], radius: f64, density: usize) -> Lattice {
        Lattice::over(self.e.domain().pieces(), center, radius, density)
    }

    pub fn value(&self, x: &[Rat]) -> Rat {
        self.e.smooth().value(x)
    }

    /// f(x) − f(x̄) − ⟨x̄*, x − x̄⟩, computed exactly.
    pub fn excess(&self, x: &[Rat]) -> f64 {
        to_f64(&(self.value(x) - &self.fbar - dot(self.xstar, &sub(x, self.xbar))))
    }

    /// (∂f)⁻¹(v) inside the cube of half-width `radius` around `center`.
    pub fn inverse(&self, v: &[Rat], center: &[Rat], radius: f64) -> InverseSlice {
        exact_inverse_image(self.e, v, &ConvexPolyhedron::cube(center, &rational_radius(radius)))
    }

    /// Exact graph points over each `u`, with `u*` within `radius` of `center_star`.
    ///
    /// Per adherent cell: the reference subgradient when it belongs to the cell's
    /// normal cone, the gradient itself, and steps of half the radius along every
    /// generator of the cone.
    pub fn graph_samples(&self, us: &[RVec], center_star: &[Rat], radius: f64) -> Vec<GraphSample> {
        let s = self.e.smooth();
        let cstar = vec_f64(center_star);
        let mut out = Vec::new();
        for u in us {
            let g = s.gradient(u);
            let target = sub(center_star, &g);
            let mut ws: BTreeSet<RVec> = BTreeSet::new();
            for cone in subgradient_cones(self.e, u) {
                let mut bases = vec![vec![Rat::from_integer(0.into()); u.len()]];
                if cone.contains(&target) {
                    bases.push(target.clone());
                }
                for b in &bases {
                    ws.insert(b.clone());
                    for d in cone.spanning_vectors() {
                        let m = d.iter().map(|x| x.abs()).max().expect("nonempty");
                        let t = rational_radius(radius / 2.0) / m;
                        ws.insert(b.iter().zip(&d).map(|(x, y)| x + &t * y).collect());
                    }
                }
            }
            for w in ws {
                let ustar = add(&g, &w);
                let d2: f64 = vec_f64(&ustar).iter().zip(&cstar).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2.sqrt() <= radius * (1.0 + 1e-12) {
                    out.push(GraphSample { u: u.clone(), ustar });
                }
            }
        }
        out
    }
}

pub(crate) fn dist_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solutions of v ∈ ∂f(x) for a one-dimensional analytic fixture in `(lo, hi)`.
pub(crate) fn analytic_inverse(a: &AnalyticFixture1D, v: f64, lo: f64, hi: f64, density: usize) -> Vec<f64> {
    // stay strictly inside the domain, where the derivative is defined
    let a_lo = if a.domain.lo >= lo { a.domain.lo + 1e-12 } else { lo };
    let a_hi = if a.domain.hi <= hi { a.domain.hi - 1e-12 } else { hi };
    let mut pts = if a_lo < a_hi { roots_1d(|x| (a.derivative)(x) - v, (a_lo, a_hi), density) } else { vec![] };
    for &e in &a.exceptional {
        if e > lo && e < hi {
            if let Ok(sd) = subdifferential(&FunctionSpec::Analytic(a.clone()), &[from_f64(e)]) {
                if sd.contains_f64(&[v], 1e-9) {
                    pts.push(e);
                }
            }
        }
    }
    pts.sort_by(|x, y| x.total_cmp(y));
    pts
}
