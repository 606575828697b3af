//! Metric subregularity and metric regularity moduli of ∂f as lattice maxima of
//! distance ratios.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{agree, uniform_1d, GridSpec, Lattice};
use super::sampling::{analytic_inverse, ExactCtx};
use super::{better_max, serialize_f64, serialize_f64s, RegularityError};
use crate::model::{AnalyticFixture1D, FunctionSpec, ProblemInstance};
use crate::rational::{to_f64, vec_f64, RVec};
use crate::subdiff::{exact_contains, exact_distance, subgradient_cones, SubdiffError};

/// Points per level for the pair grid of the metric regularity estimate.
const PAIR_BUDGET: usize = 2_000_000;
const POINT_BUDGET: usize = 200_000;

#[derive(Clone, Debug, Serialize)]
pub struct ModulusEstimate {
    #[serde(serialize_with = "serialize_f64")]
    pub value: f64,
    pub grid: GridSpec,
    /// The last two levels agreed within 2%.
    pub converged: bool,
    /// Maximizing point (subregularity) or maximizing pair `[x, y]` (regularity).
    pub witness: Vec<Vec<f64>>,
    /// Value reached at each refinement level.
    #[serde(serialize_with = "serialize_f64s")]
    pub levels: Vec<f64>,
    /// A value `y` whose inverse slice near x̄ is empty, making the ratio unbounded.
    pub unbounded_at: Option<Vec<f64>>,
}

/// κ̂ = max over lattice points x ∈ B_η(x̄) outside (∂f)⁻¹(x̄*) of
/// d(x; (∂f)⁻¹(x̄*)) / d(x̄*; ∂f(x)).
///
/// The inverse image is taken inside the cube of half-width 3η around x̄.
pub fn estimate_subregularity_modulus(inst: &ProblemInstance) -> Result<ModulusEstimate, RegularityError> {
    if let FunctionSpec::Analytic(a) = &inst.f {
        return analytic_subregularity(inst, a);
    }
    let ctx = ExactCtx::new(inst)?;
    let p = &inst.params;
    let slice = ctx.inverse(ctx.xstar, ctx.xbar, 3.0 * p.eta);
    if slice.is_empty() {
        return Err(SubdiffError::EmptySlice.into());
    }
    let xs_f = vec_f64(ctx.xstar);
    let lat = ctx.lattice(ctx.xbar, p.eta, p.grid);
    refine(&lat, p.max_refinements, |level| {
        let pts = lat.points(level);
        pts.par_iter()
            .filter_map(|x| {
                if exact_contains(ctx.e, x, ctx.xstar) {
                    return None;
                }
                let xf = vec_f64(x);
                let num = slice.distance(&xf).ok()?;
                let den = exact_distance(ctx.e, x, &xs_f).ok()?;
                Some((num / den, xf))
            })
            .reduce(|| (0.0, vec![]), better_max)
    })
}

fn refine(lat: &Lattice, max_level: usize, eval: impl Fn(usize) -> (f64, Vec<f64>)) -> Result<ModulusEstimate, RegularityError> {
    let mut levels = Vec::new();
    let mut best = (0.0, vec![]);
    let mut converged = false;
    let mut level = 0;
    for l in 0..=max_level {
        if l > 0 && lat.size_bound(l) > POINT_BUDGET {
            break;
        }
        level = l;
        best = eval(l);
        levels.push(best.0);
        if l > 0 && agree(levels[l - 1], best.0) {
            converged = true;
            break;
        }
    }
    let witness = if best.1.is_empty() { vec![] } else { vec![best.1] };
    Ok(ModulusEstimate { value: best.0, grid: lat.spec(level), converged, witness, levels, unbounded_at: None })
}

fn analytic_subregularity(inst: &ProblemInstance, a: &AnalyticFixture1D) -> Result<ModulusEstimate, RegularityError> {
    let p = &inst.params;
    let xb = to_f64(&inst.xbar[0]);
    let v = to_f64(&inst.xstar[0]);
    let inv = analytic_inverse(a, v, xb - 3.0 * p.eta, xb + 3.0 * p.eta, p.samples_1d);
    if inv.is_empty() {
        return Err(SubdiffError::EmptySlice.into());
    }
    let dist_inv = |x: f64| inv.iter().map(|r| (x - r).abs()).fold(f64::INFINITY, f64::min);
    let (lo, hi) = (a.domain.lo.max(xb - p.eta), a.domain.hi.min(xb + p.eta));
    let mut levels = Vec::new();
    let mut best = (0.0, vec![]);
    let mut converged = false;
    let mut level = 0;
    for l in 0..=p.max_refinements {
        level = l;
        let pts = uniform_1d(lo, hi, (p.grid * 250 << l) + 1);
        best = pts
            .par_iter()
            .filter(|&&x| a.domain.contains(x) && !a.exceptional.contains(&x))
            .filter_map(|&x| {
                let num = dist_inv(x);
                let den = ((a.derivative)(x) - v).abs();
                (num > 0.0 && den > 0.0).then(|| (num / den, vec![x]))
            })
            .reduce(|| (0.0, vec![]), better_max);
        levels.push(best.0);
        if l > 0 && agree(levels[l - 1], best.0) {
            converged = true;
            break;
        }
    }
    let witness = if best.1.is_empty() { vec![] } else { vec![best.1] };
    Ok(ModulusEstimate {
        value: best.0,
        grid: GridSpec { radius: p.eta, density: p.grid * 250, refinement_level: level },
        converged,
        witness,
        levels,
        unbounded_at: None,
    })
}

/// κ̂ = max over lattice pairs x ∈ B_η(x̄), y ∈ B_δ(x̄*) with y ∉ ∂f(x) of
/// d(x; (∂f)⁻¹(y)) / d(y; ∂f(x)).
///
/// An empty inverse slice (inside the cube of half-width 3η around x̄) makes
/// the estimate infinite and is reported through `unbounded_at`.
pub fn estimate_metric_regularity_modulus(inst: &ProblemInstance) -> Result<ModulusEstimate, RegularityError> {
    let ctx = ExactCtx::new(inst)?;
    let p = &inst.params;
    let lat_x = ctx.lattice(ctx.xbar, p.eta, p.grid);
    let lat_y = Lattice::ball(ctx.xstar, p.delta, p.grid);
    let s = ctx.e.smooth();
    let mut levels = Vec::new();
    let mut best = (0.0, vec![]);
    let mut converged = false;
    let mut level = 0;
    for l in 0..=p.max_refinements {
        if l > 0 && lat_x.size_bound(l).saturating_mul(lat_y.size_bound(l)) > PAIR_BUDGET {
            break;
        }
        level = l;
        let xs: Vec<(Vec<f64>, Vec<f64>, Vec<crate::polygeom::PolyCone>)> = lat_x
            .points(l)
            .iter()
            .map(|x| (vec_f64(x), vec_f64(&s.gradient(x)), subgradient_cones(ctx.e, x)))
            .collect();
        let ys: Vec<RVec> = lat_y.points(l);
        let per_y: Vec<Result<(f64, Vec<f64>), Vec<f64>>> = ys
            .par_iter()
            .map(|y| {
                let yf = vec_f64(y);
                let slice = ctx.inverse(y, ctx.xbar, 3.0 * p.eta);
                if slice.is_empty() {
                    return Err(yf);
                }
                let mut acc = (0.0, vec![]);
                for (xf, g, cones) in &xs {
                    let d: Vec<f64> = yf.iter().zip(g).map(|(a, b)| a - b).collect();
                    let den = cones.iter().map(|c| c.distance_f64(&d)).fold(f64::INFINITY, f64::min);
                    if den <= 1e-12 {
                        continue;
                    }
                    let Ok(num) = slice.distance(xf) else { continue };
                    let mut w = xf.clone();
                    w.extend(yf.iter().copied());
                    acc = better_max(acc, (num / den, w));
                }
                Ok(acc)
            })
            .collect();
        if let Some(Err(y)) = per_y.iter().find(|r| r.is_err()) {
            levels.push(f64::INFINITY);
            return Ok(ModulusEstimate {
                value: f64::INFINITY,
                grid: lat_x.spec(l),
                converged: false,
                witness: vec![],
                levels,
                unbounded_at: Some(y.clone()),
            });
        }
        best = per_y.into_iter().map(|r| r.expect("checked")).fold((0.0, vec![]), better_max);
        levels.push(best.0);
        if l > 0 && agree(levels[l - 1], best.0) {
            converged = true;
            break;
        }
    }
    let n = ctx.e.dim();
    let witness = if best.1.is_empty() { vec![] } else { vec![best.1[..n].to_vec(), best.1[n..].to_vec()] };
    Ok(ModulusEstimate { value: best.0, grid: lat_x.spec(level), converged, witness, levels, unbounded_at: None })
}
