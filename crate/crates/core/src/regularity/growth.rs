//! Quadratic growth and one-sided prox inequalities checked on lattices.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{uniform_1d, GridSpec};
use super::sampling::{analytic_inverse, dist_f64, dot_f64, ExactCtx};
use super::{serialize_f64, RegularityError};
use crate::model::{AnalyticFixture1D, FunctionSpec, ProblemInstance};
use crate::rational::{to_f64, vec_f64};
use crate::subdiff::exact_contains;

const CHECK_BUDGET: usize = 200_000;
const PAIR_X_BUDGET: usize = 3_000;
const PAIR_U_BUDGET: usize = 600;
const MAX_LISTED: usize = 50;

/// Squared quantity multiplying α/2 in the growth inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthMode {
    /// d²(x; (∂f)⁻¹(x̄*)).
    DistanceSquared,
    /// ‖x − x̄‖².
    NormSquared,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub mode: GrowthMode,
    pub alpha: f64,
    /// Largest α with no violation on the grid.
    #[serde(serialize_with = "serialize_f64")]
    pub alpha_hat: f64,
    pub eta: f64,
    pub tol: f64,
    pub grid: GridSpec,
    pub points: usize,
    pub violation_count: usize,
    /// The first few violating points.
    pub violations: Vec<Vec<f64>>,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Evaluation points with the excess f(x) − f(x̄) − ⟨x̄*, x − x̄⟩.
struct Points {
    xs: Vec<Vec<f64>>,
    excess: Vec<f64>,
    grid: GridSpec,
}

fn exact_points(ctx: &ExactCtx, eta: f64, density: usize, max_level: usize, budget: usize) -> Points {
    let lat = ctx.lattice(ctx.xbar, eta, density);
    let level = lat.level_within(max_level, budget);
    let pts = lat.points(level);
    let excess = pts.par_iter().map(|x| ctx.excess(x)).collect();
    Points { xs: pts.iter().map(|x| vec_f64(x)).collect(), excess, grid: lat.spec(level) }
}

fn analytic_points(a: &AnalyticFixture1D, xb: f64, v: f64, eta: f64, count: usize) -> Points {
    let (lo, hi) = (a.domain.lo.max(xb - eta), a.domain.hi.min(xb + eta));
    let fb = a.eval(xb);
    let xs: Vec<f64> = uniform_1d(lo, hi, count).into_iter().filter(|x| a.domain.contains(*x)).collect();
    let excess = xs.iter().map(|&x| a.eval(x) - fb - v * (x - xb)).collect();
    Points { xs: xs.into_iter().map(|x| vec![x]).collect(), excess, grid: GridSpec { radius: eta, density: count, refinement_level: 0 } }
}

/// Distance to (∂f)⁻¹(x̄*) for both variants.
fn inverse_distance(inst: &ProblemInstance) -> Result<Box<dyn Fn(&[f64]) -> f64 + Sync + '_>, RegularityError> {
    let p = &inst.params;
    match &inst.f {
        FunctionSpec::Exact(_) => {
            let ctx = ExactCtx::new(inst)?;
            let slice = ctx.inverse(&inst.xstar, &inst.xbar, 3.0 * p.eta);
            Ok(Box::new(move |x| slice.distance(x).unwrap_or(f64::INFINITY)))
        }
        FunctionSpec::Analytic(a) => {
            let xb = to_f64(&inst.xbar[0]);
            let inv = analytic_inverse(a, to_f64(&inst.xstar[0]), xb - 3.0 * p.eta, xb + 3.0 * p.eta, p.samples_1d);
            Ok(Box::new(move |x| inv.iter().map(|r| (x[0] - r).abs()).fold(f64::INFINITY, f64::min)))
        }
    }
}

/// Checks f(x) ≥ f(x̄) + ⟨x̄*, x − x̄⟩ + (α/2)·D(x) on the grid in B_η(x̄), with D
/// chosen by `mode`, and reports the largest α passing on the same grid.
pub fn check_growth(inst: &ProblemInstance, alpha: f64, mode: GrowthMode) -> Result<GrowthReport, RegularityError> {
    let p = &inst.params;
    let xb = inst.xbar_f64();
    let pts = match &inst.f {
        FunctionSpec::Exact(_) => exact_points(&ExactCtx::new(inst)?, p.eta, p.grid, p.max_refinements, CHECK_BUDGET),
        FunctionSpec::Analytic(a) => analytic_points(a, xb[0], to_f64(&inst.xstar[0]), p.eta, p.samples_1d),
    };
    let dist = match mode {
        GrowthMode::DistanceSquared => Some(inverse_distance(inst)?),
        GrowthMode::NormSquared => None,
    };
    let d2: Vec<f64> = pts
        .xs
        .par_iter()
        .map(|x| match &dist {
            Some(d) => d(x).powi(2),
            None => dist_f64(x, &xb).powi(2),
        })
        .collect();
    let tol = p.tol;
    let mut alpha_hat = f64::INFINITY;
    let mut violations = Vec::new();
    let mut count = 0;
    for ((x, ex), d) in pts.xs.iter().zip(&pts.excess).zip(&d2) {
        if *d > 0.0 {
            alpha_hat = alpha_hat.min(2.0 * (ex + tol) / d);
        } else if *ex < -tol {
            alpha_hat = f64::NEG_INFINITY;
        }
        if ex - 0.5 * alpha * d < -tol {
            count += 1;
            if violations.len() < MAX_LISTED {
                violations.push(x.clone());
            }
        }
    }
    Ok(GrowthReport { mode, alpha, alpha_hat, eta: p.eta, tol, grid: pts.grid, points: pts.xs.len(), violation_count: count, violations })
}

/// Lower estimates with a quadratic defect, all of the form
/// `lhs ≥ rhs − (p/2)·D` for a parameter `p` (r or β).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProxMode {
    /// f(x) ≥ f(x̄) + ⟨x̄*, x − x̄⟩ − (r/2)·d²(x; (∂f)⁻¹(x̄*)) for x ∈ B_η(x̄).
    BaseDistance,
    /// f(u) ≥ f(x) + ⟨x*, u − x⟩ − (β/2)·d²(x; (∂f)⁻¹(x̄*)) for u ∈ (∂f)⁻¹(x̄*) and
    /// (x, x*) ∈ gph ∂f, both within η of the reference point or pair.
    GraphDistance,
    /// f(x̄) ≥ f(x) + ⟨x*, x̄ − x⟩ − (β/2)·‖x − x̄‖² for (x, x*) ∈ gph ∂f ∩ B_η(x̄, x̄*).
    GraphNorm,
    /// f(x) ≥ f(u) + ⟨u*, x − u⟩ − (r/2)·‖x − u‖² for x ∈ B_η(x̄) and
    /// (u, u*) ∈ gph ∂f with u ∈ B_η(x̄), u* ∈ B_η(x̄*).
    ProxRegular,
    /// As [`ProxMode::ProxRegular`] with u* ∈ B_δ(x̄*).
    UniformProx,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProxWitness {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub ustar: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProxReport {
    pub mode: ProxMode,
    pub parameter: f64,
    pub passed: bool,
    /// Smallest parameter for which every sample passes.
    #[serde(serialize_with = "serialize_f64")]
    pub required: f64,
    /// Largest shortfall at the tested parameter (0 when passing).
    pub worst_violation: f64,
    pub witness: Option<ProxWitness>,
    pub samples: usize,
    pub grid: GridSpec,
}

/// Graph samples in f64: (u, f(u), u*).
type Pair = (Vec<f64>, f64, Vec<f64>);

struct Tally {
    param: f64,
    tol: f64,
    required: f64,
    worst: f64,
    witness: Option<ProxWitness>,
    samples: usize,
}

impl Tally {
    fn new(param: f64, tol: f64) -> Self {
        Tally { param, tol, required: 0.0, worst: 0.0, witness: None, samples: 0 }
    }

    /// Records `slack + (p/2)·d ≥ −tol`.
    fn add(&mut self, slack: f64, d: f64, w: impl FnOnce() -> ProxWitness) {
        self.samples += 1;
        if d > 0.0 {
            self.required = self.required.max(-2.0 * (slack + self.tol) / d);
        } else if slack < -self.tol {
            self.required = f64::INFINITY;
        }
        let short = -(slack + 0.5 * self.param * d) - self.tol;
        if short > self.worst {
            self.worst = short;
            self.witness = Some(w());
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.samples += o.samples;
        self.required = self.required.max(o.required);
        if o.worst > self.worst {
            self.worst = o.worst;
            self.witness = o.witness;
        }
        self
    }
}

/// Checks the chosen lower estimate with parameter `param` on grid samples and
/// reports the smallest passing parameter on the same samples.
pub fn check_lower_prox_inequality(inst: &ProblemInstance, param: f64, mode: ProxMode) -> Result<ProxReport, RegularityError> {
    let p = &inst.params;
    let xb = inst.xbar_f64();
    let xs_star = inst.xstar_f64();
    let star_radius = if mode == ProxMode::UniformProx { p.delta } else { p.eta };
    let single = mode == ProxMode::BaseDistance;
    let x_budget = if single { CHECK_BUDGET } else { PAIR_X_BUDGET };

    // evaluation points x with f(x), graph pairs, and members of the inverse image
    let (pts, fbar, pairs, members): (Points, f64, Vec<Pair>, Vec<(Vec<f64>, f64)>) = match &inst.f {
        FunctionSpec::Exact(_) => {
            let ctx = ExactCtx::new(inst)?;
            let fbar = to_f64(&ctx.fbar);
            let pts = exact_points(&ctx, p.eta, p.grid, p.max_refinements, x_budget);
            let pairs = if single {
                vec![]
            } else {
                let lat = ctx.lattice(ctx.xbar, p.eta, p.grid);
                let us = lat.points(lat.level_within(p.max_refinements, PAIR_U_BUDGET));
                ctx.graph_samples(&us, ctx.xstar, star_radius)
                    .into_iter()
                    .map(|g| (vec_f64(&g.u), to_f64(&ctx.value(&g.u)), vec_f64(&g.ustar)))
                    .collect()
            };
            let members = if mode == ProxMode::GraphDistance {
                let lat = ctx.lattice(ctx.xbar, p.eta, p.grid);
                lat.points(lat.level_within(p.max_refinements, PAIR_X_BUDGET))
                    .into_iter()
                    .filter(|u| exact_contains(ctx.e, u, ctx.xstar))
                    .map(|u| (vec_f64(&u), to_f64(&ctx.value(&u))))
                    .collect()
            } else {
                vec![]
            };
            (pts, fbar, pairs, members)
        }
        FunctionSpec::Analytic(a) => {
            let v = xs_star[0];
            let count = if single { p.samples_1d } else { PAIR_X_BUDGET };
            let pts = analytic_points(a, xb[0], v, p.eta, count);
            let fbar = a.eval(xb[0]);
            let mut pairs: Vec<Pair> = Vec::new();
            if !single {
                let (lo, hi) = (a.domain.lo.max(xb[0] - p.eta), a.domain.hi.min(xb[0] + p.eta));
                for u in uniform_1d(lo, hi, PAIR_U_BUDGET) {
                    if a.domain.contains(u) && !a.exceptional.contains(&u) {
                        let d = (a.derivative)(u);
                        if (d - v).abs() <= star_radius {
                            pairs.push((vec![u], a.eval(u), vec![d]));
                        }
                    }
                }
                pairs.push((xb.clone(), fbar, xs_star.clone()));
            }
            let members = if mode == ProxMode::GraphDistance {
                analytic_inverse(a, v, xb[0] - p.eta, xb[0] + p.eta, p.samples_1d).into_iter().map(|u| (vec![u], a.eval(u))).collect()
            } else {
                vec![]
            };
            (pts, fbar, pairs, members)
        }
    };
    let fx: Vec<f64> = pts.excess.iter().zip(&pts.xs).map(|(ex, x)| ex + fbar + dot_f64(&xs_star, &sub_f(x, &xb))).collect();
    let needs_dist = matches!(mode, ProxMode::BaseDistance | ProxMode::GraphDistance);
    let dist = if needs_dist { Some(inverse_distance(inst)?) } else { None };
    let tol = p.tol;

    let tally = match mode {
        ProxMode::BaseDistance => {
            let d = dist.as_ref().expect("distance mode");
            pts.xs
                .par_iter()
                .zip(&pts.excess)
                .fold(
                    || Tally::new(param, tol),
                    |mut t, (x, ex)| {
                        t.add(*ex, d(x).powi(2), || ProxWitness { x: x.clone(), u: xb.clone(), ustar: xs_star.clone() });
                        t
                    },
                )
                .reduce(|| Tally::new(param, tol), Tally::merge)
        }
        ProxMode::GraphDistance => {
            let d = dist.as_ref().expect("distance mode");
            pairs
                .par_iter()
                .fold(
                    || Tally::new(param, tol),
                    |mut t, (x, fxv, xstar)| {
                        let dx = d(x).powi(2);
                        for (u, fu) in &members {
                            let slack = fu - fxv - dot_f64(xstar, &sub_f(u, x));
                            t.add(slack, dx, || ProxWitness { x: x.clone(), u: u.clone(), ustar: xstar.clone() });
                        }
                        t
                    },
                )
                .reduce(|| Tally::new(param, tol), Tally::merge)
        }
        ProxMode::GraphNorm => pairs
            .par_iter()
            .fold(
                || Tally::new(param, tol),
                |mut t, (x, fxv, xstar)| {
                    let slack = fbar - fxv - dot_f64(xstar, &sub_f(&xb, x));
                    t.add(slack, dist_f64(x, &xb).powi(2), || ProxWitness { x: x.clone(), u: xb.clone(), ustar: xstar.clone() });
                    t
                },
            )
            .reduce(|| Tally::new(param, tol), Tally::merge),
        ProxMode::ProxRegular | ProxMode::UniformProx => pairs
            .par_iter()
            .fold(
                || Tally::new(param, tol),
                |mut t, (u, fu, ustar)| {
                    for (x, fxv) in pts.xs.iter().zip(&fx) {
                        let slack = fxv - fu - dot_f64(ustar, &sub_f(x, u));
                        t.add(slack, dist_f64(x, u).powi(2), || ProxWitness { x: x.clone(), u: u.clone(), ustar: ustar.clone() });
                    }
                    t
                },
            )
            .reduce(|| Tally::new(param, tol), Tally::merge),
    };
    Ok(ProxReport {
        mode,
        parameter: param,
        passed: tally.worst <= 0.0,
        required: tally.required,
        worst_violation: tally.worst.max(0.0),
        witness: tally.witness,
        samples: tally.samples,
        grid: pts.grid,
    })
}

fn sub_f(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
