//! Checks quantified over values u* near x̄*: uniform quadratic growth,
//! single-valued localization of (∂f)⁻¹, and second-order bounds along the graph.

use std::collections::BTreeSet;

use num::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::{rational_radius, GridSpec, Lattice};
use super::sampling::{dist_f64, dot_f64, ExactCtx};
use super::{serialize_f64, RegularityError};
use crate::hessian::{graph_model, graph_normal_cone_regular, pair_form};
use crate::model::ProblemInstance;
use crate::polygeom::forms::{form_sign, FormSign};
use crate::polygeom::LinearMin;
use crate::rational::{approx_f64, fmt_rat, int, neg, to_f64, vec_f64, RVec, Rat};
use crate::subdiff::InverseSlice;

const X_BUDGET: usize = 3_000;
const STAR_BUDGET: usize = 400;
const MAX_LISTED: usize = 20;

/// Outcome of a check that a finite grid can refute but never confirm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridVerdict {
    NoCounterexampleOnGrid,
    Fails,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformGrowthReport {
    pub kappa: f64,
    pub verdict: GridVerdict,
    /// A value u* for which no u in the slice satisfies the inequality.
    pub counterexample: Option<Vec<f64>>,
    pub tested: usize,
    pub grid: GridSpec,
}

/// Representative points of a slice: vertices of point pieces and two
/// extreme points of every other piece.
fn slice_points(slice: &InverseSlice) -> Vec<RVec> {
    let mut out: BTreeSet<RVec> = BTreeSet::new();
    for p in &slice.pieces {
        let Some((_, basis)) = p.affine_hull() else { continue };
        if let Some(pt) = p.point() {
            out.insert(pt);
        }
        if let Some(b) = basis.first() {
            for dir in [b.clone(), neg(b)] {
                if let LinearMin::Optimal { point, .. } = p.minimize(&dir) {
                    out.insert(point);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// For each u* on the lattice in B_δ(x̄*), looks for u ∈ (∂f)⁻¹(u*) ∩ B_η(x̄) with
/// f(x) ≥ f(u) + ⟨u*, x − u⟩ + (1/2κ)‖x − u‖² at every lattice x ∈ B_η(x̄).
pub fn check_uniform_growth(inst: &ProblemInstance, kappa: f64) -> Result<UniformGrowthReport, RegularityError> {
    let ctx = ExactCtx::new(inst)?;
    let p = &inst.params;
    let lat = ctx.lattice(ctx.xbar, p.eta, p.grid);
    let xs: Vec<(Vec<f64>, f64)> = lat.points(lat.level_within(p.max_refinements, X_BUDGET)).iter().map(|x| (vec_f64(x), to_f64(&ctx.value(x)))).collect();
    let star = Lattice::ball(ctx.xstar, p.delta, p.grid);
    let level = star.level_within(p.max_refinements, STAR_BUDGET);
    let ys = star.points(level);
    let xb = vec_f64(ctx.xbar);
    let c = 0.5 / kappa;
    let tol = p.tol;
    let bad: Vec<Option<Vec<f64>>> = ys
        .par_iter()
        .map(|y| {
            let yf = vec_f64(y);
            let slice = ctx.inverse(y, ctx.xbar, p.eta);
            let mut cands: BTreeSet<RVec> = slice_points(&slice).into_iter().collect();
            for piece in &slice.pieces {
                cands.extend(Lattice::over(std::slice::from_ref(piece), ctx.xbar, p.eta, p.grid).points(0));
            }
            let ok = cands.iter().any(|u| {
                let uf = vec_f64(u);
                if dist_f64(&uf, &xb) > p.eta * (1.0 + 1e-12) {
                    return false;
                }
                let fu = to_f64(&ctx.value(u));
                xs.iter().all(|(x, fx)| {
                    let d: Vec<f64> = x.iter().zip(&uf).map(|(a, b)| a - b).collect();
                    fx - fu - dot_f64(&yf, &d) - c * dot_f64(&d, &d) >= -tol
                })
            });
            (!ok).then_some(yf)
        })
        .collect();
    let counterexample = bad.into_iter().flatten().next();
    Ok(UniformGrowthReport {
        kappa,
        verdict: if counterexample.is_some() { GridVerdict::Fails } else { GridVerdict::NoCounterexampleOnGrid },
        counterexample,
        tested: ys.len(),
        grid: star.spec(level),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationWitness {
    /// The value u* (exact and rounded).
    pub tilt: Vec<f64>,
    pub tilt_exact: Vec<String>,
    /// Two distinct points of (∂f)⁻¹(u*) ∩ B_η(x̄), or none when the slice is empty.
    pub points: Vec<Vec<f64>>,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    pub verdict: GridVerdict,
    /// Largest sampled difference quotient of the localization (when it holds).
    #[serde(serialize_with = "serialize_f64")]
    pub lipschitz: f64,
    pub witness: Option<LocalizationWitness>,
    pub tested: usize,
    pub grid: GridSpec,
}

enum SliceShape {
    Single(Vec<f64>),
    /// Distinct points, with the spread of their distances to x̄.
    Multi(Vec<Vec<f64>>, f64),
    Empty,
}

/// Tests whether u* ↦ (∂f)⁻¹(u*) ∩ B_η(x̄) is single-valued for u* on the lattice in B_δ(x̄*).
///
/// Among failing values the witness is the one whose two preimages are closest
/// to equidistant from x̄; ties go to the first in lattice order.
pub fn check_single_valued_localization(inst: &ProblemInstance) -> Result<LocalizationReport, RegularityError> {
    let ctx = ExactCtx::new(inst)?;
    let p = &inst.params;
    let star = Lattice::ball(ctx.xstar, p.delta, p.grid);
    let level = star.level_within(p.max_refinements, STAR_BUDGET);
    let ys = star.points(level);
    let xb = vec_f64(ctx.xbar);
    let shapes: Vec<SliceShape> = ys
        .par_iter()
        .map(|y| {
            let slice = ctx.inverse(y, ctx.xbar, p.eta);
            let pts: Vec<Vec<f64>> = slice_points(&slice).iter().map(|u| vec_f64(u)).filter(|u| dist_f64(u, &xb) <= p.eta * (1.0 + 1e-12)).collect();
            let mut distinct: Vec<Vec<f64>> = Vec::new();
            for u in pts {
                if distinct.iter().all(|d| dist_f64(d, &u) > 1e-9) {
                    distinct.push(u);
                }
            }
            match distinct.len() {
                0 => SliceShape::Empty,
                1 => SliceShape::Single(distinct.pop().expect("one")),
                _ => {
                    let r: Vec<f64> = distinct.iter().map(|u| dist_f64(u, &xb)).collect();
                    let mut spread = f64::INFINITY;
                    let mut pair = (0, 1);
                    for i in 0..r.len() {
                        for j in i + 1..r.len() {
                            if (r[i] - r[j]).abs() < spread {
                                spread = (r[i] - r[j]).abs();
                                pair = (i, j);
                            }
                        }
                    }
                    SliceShape::Multi(vec![distinct[pair.0].clone(), distinct[pair.1].clone()], spread)
                }
            }
        })
        .collect();
    let mk = |i: usize, points: Vec<Vec<f64>>, reason: &str| LocalizationWitness {
        tilt: vec_f64(&ys[i]),
        tilt_exact: ys[i].iter().map(fmt_rat).collect(),
        points,
        reason: reason.into(),
    };
    let mut best: Option<(f64, usize)> = None;
    for (i, s) in shapes.iter().enumerate() {
        if let SliceShape::Multi(_, spread) = s {
            if best.is_none_or(|(b, _)| *spread < b) {
                best = Some((*spread, i));
            }
        }
    }
    let witness = match best {
        Some((_, i)) => match &shapes[i] {
            SliceShape::Multi(pts, _) => Some(mk(i, pts.clone(), "several preimages near the reference point")),
            _ => unreachable!(),
        },
        None => shapes.iter().position(|s| matches!(s, SliceShape::Empty)).map(|i| mk(i, vec![], "no preimage near the reference point")),
    };
    if witness.is_some() {
        return Ok(LocalizationReport { verdict: GridVerdict::Fails, lipschitz: f64::NAN, witness, tested: ys.len(), grid: star.spec(level) });
    }
    let sel: Vec<(Vec<f64>, Vec<f64>)> = shapes
        .into_iter()
        .zip(&ys)
        .map(|(s, y)| match s {
            SliceShape::Single(u) => (vec_f64(y), u),
            _ => unreachable!(),
        })
        .collect();
    let mut lip: f64 = 0.0;
    for i in 0..sel.len() {
        for j in i + 1..sel.len() {
            lip = lip.max(dist_f64(&sel[i].1, &sel[j].1) / dist_f64(&sel[i].0, &sel[j].0));
        }
    }
    Ok(LocalizationReport { verdict: GridVerdict::NoCounterexampleOnGrid, lipschitz: lip, witness: None, tested: ys.len(), grid: star.spec(level) })
}

#[derive(Clone, Debug, Serialize)]
pub struct CombinedBoundViolation {
    pub x: Vec<String>,
    pub xstar: Vec<String>,
    /// `"norm"` for κ‖u*‖ < ‖u‖, `"inner"` for ⟨u*, u⟩ < −r‖u‖².
    pub kind: String,
    pub u: Vec<String>,
    pub ustar: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombinedBoundReport {
    pub kappa: f64,
    pub r: f64,
    pub passed: bool,
    pub tested: usize,
    pub violations: Vec<CombinedBoundViolation>,
}

/// Checks κ‖u*‖ ≥ ‖u‖ and ⟨u*, u⟩ ≥ −r‖u‖² for all u* in the combined
/// second-order subdifferential at sampled graph points (x, x*) within η of
/// (x̄, x̄*). Each check is an exact sign test of a quadratic form on the
/// regular normal cone of the graph.
pub fn check_combined_lower_bound(inst: &ProblemInstance, kappa: f64, r: f64) -> Result<CombinedBoundReport, RegularityError> {
    let ctx = ExactCtx::new(inst)?;
    let p = &inst.params;
    let n = ctx.e.dim();
    let us = ctx.lattice(ctx.xbar, p.eta, p.grid).points(0);
    let samples = ctx.graph_samples(&us, ctx.xstar, p.eta);
    let k2 = approx_f64(kappa * kappa, 1_000_000_000);
    let norm_form: Vec<RVec> = (0..2 * n)
        .map(|i| (0..2 * n).map(|j| if i != j { Rat::zero() } else if i < n { k2.clone() } else { -int(1) }).collect())
        .collect();
    let inner_form = pair_form(n, &rational_radius(r), &Rat::zero());
    let all: Vec<usize> = (0..2 * n).collect();
    let found: Vec<Vec<CombinedBoundViolation>> = samples
        .par_iter()
        .map(|g| {
            let mut out = Vec::new();
            let Ok(model) = graph_model(ctx.e, &g.u, &g.ustar) else { return out };
            let Ok(k) = graph_normal_cone_regular(&model) else { return out };
            for (kind, form) in [("norm", &norm_form), ("inner", &inner_form)] {
                if let FormSign::Negative(v) = form_sign(&k, form, &all) {
                    out.push(CombinedBoundViolation {
                        x: g.u.iter().map(fmt_rat).collect(),
                        xstar: g.ustar.iter().map(fmt_rat).collect(),
                        kind: kind.into(),
                        u: neg(&v[n..]).iter().map(fmt_rat).collect(),
                        ustar: v[..n].iter().map(fmt_rat).collect(),
                    });
                }
            }
            out
        })
        .collect();
    let violations: Vec<CombinedBoundViolation> = found.into_iter().flatten().take(MAX_LISTED).collect();
    Ok(CombinedBoundReport { kappa, r, passed: violations.is_empty(), tested: samples.len(), violations })
}
