//! Global minimization of tilted functions over a ball, and the tilt-stability
//! verdict built on it.
//!
//! On each face of each domain piece the tilted objective is a quadratic in the
//! coordinates of the face's affine hull. Its minimum over the face ∩ ball is
//! attained at a critical point of the quadratic on the open ball, at a
//! critical point on the sphere (a trust-region secular equation solved in the
//! eigenbasis), or on a lower-dimensional face, which has its own chart.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::grid::Lattice;
use super::sampling::dist_f64;
use super::{serialize_f64, RegularityError};
use crate::model::{ExactFunction, ProblemInstance};
use crate::polygeom::ConvexPolyhedron;
use crate::rational::{project_affine, to_f64, vec_f64, zeros, RVec};

/// Largest ambient dimension accepted by the tilt solver.
pub const MAX_TILT_DIM: usize = 3;

/// Values within this gap of the optimum count as minimal.
const TIE: f64 = 1e-9;
/// Minimizers closer than this are merged.
const MERGE: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct TiltSolution {
    /// Optimal value of f − ⟨x*, ·⟩ over the ball.
    pub value: f64,
    /// All distinct minimizers found, sorted.
    pub minimizers: Vec<Vec<f64>>,
}

impl TiltSolution {
    pub fn is_unique(&self) -> bool {
        self.minimizers.len() == 1
    }

    /// Largest distance between two minimizers.
    pub fn diameter(&self) -> f64 {
        let m = &self.minimizers;
        let mut d: f64 = 0.0;
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                d = d.max(dist_f64(&m[i], &m[j]));
            }
        }
        d
    }
}

struct Chart {
    piece: usize,
    origin: Vec<f64>,
    /// Orthonormal basis of the face directions, rotated to the eigenbasis of the restricted Hessian.
    basis: Vec<Vec<f64>>,
    eig: Vec<f64>,
    r2: f64,
}

pub(crate) struct TiltSolver {
    q: Vec<Vec<f64>>,
    c: Vec<f64>,
    d: f64,
    center: Vec<f64>,
    radius: f64,
    pieces: Vec<ConvexPolyhedron>,
    charts: Vec<Chart>,
}

impl TiltSolver {
    pub fn new(e: &ExactFunction, center: &[crate::rational::Rat], radius: f64) -> Result<Self, RegularityError> {
        let n = e.dim();
        if n > MAX_TILT_DIM {
            return Err(RegularityError::DimensionTooLarge(n));
        }
        let s = e.smooth();
        let q = s.q_f64();
        let cf = vec_f64(center);
        let pieces = e.domain().pieces().to_vec();
        let mut charts = Vec::new();
        for (pi, p) in pieces.iter().enumerate() {
            for f in p.faces() {
                let rows: Vec<RVec> = f.active.iter().map(|&i| p.a()[i].clone()).collect();
                let rhs: RVec = f.active.iter().map(|&i| p.b()[i].clone()).collect();
                let Some(o) = project_affine(&rows, &rhs, center) else { continue };
                let origin = vec_f64(&o);
                let r2 = radius * radius - dist_f64(&origin, &cf).powi(2);
                if r2 < -1e-12 {
                    continue;
                }
                let dirs = crate::rational::null_space(&rows, n);
                let b = crate::polygeom::orthonormalize(dirs.iter().map(|v| vec_f64(v)).collect());
                let k = b.len();
                let (eig, basis) = if k == 0 {
                    (vec![], vec![])
                } else {
                    let h = DMatrix::from_fn(k, k, |i, j| (0..n).map(|a| (0..n).map(|c| b[i][a] * q[a][c] * b[j][c]).sum::<f64>()).sum::<f64>());
                    let se = SymmetricEigen::new(h);
                    let basis = (0..k)
                        .map(|col| (0..n).map(|a| (0..k).map(|i| se.eigenvectors[(i, col)] * b[i][a]).sum::<f64>()).collect())
                        .collect();
                    (se.eigenvalues.iter().copied().collect(), basis)
                };
                charts.push(Chart { piece: pi, origin, basis, eig, r2: r2.max(0.0) });
            }
        }
        if charts.is_empty() {
            return Err(RegularityError::EmptyFeasibleSet);
        }
        Ok(TiltSolver { q, c: vec_f64(&s.c), d: to_f64(&s.d), center: cf, radius, pieces, charts })
    }

    fn objective(&self, x: &[f64], t: &[f64]) -> f64 {
        let n = x.len();
        let mut v = self.d;
        for i in 0..n {
            v += (self.c[i] - t[i]) * x[i];
            for j in 0..n {
                v += 0.5 * x[i] * self.q[i][j] * x[j];
            }
        }
        v
    }

    pub fn solve(&self, t: &[f64]) -> TiltSolution {
        let n = self.center.len();
        let mut cands: Vec<(f64, Vec<f64>)> = Vec::new();
        for ch in &self.charts {
            // gradient of the tilted objective at the chart origin, in chart coordinates
            let grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| self.q[i][j] * ch.origin[j]).sum::<f64>() + self.c[i] - t[i]).collect();
            let g: Vec<f64> = ch.basis.iter().map(|b| b.iter().zip(&grad).map(|(p, q)| p * q).sum()).collect();
            for y in chart_candidates(&ch.eig, &g, ch.r2) {
                let mut x = ch.origin.clone();
                for (yi, b) in y.iter().zip(&ch.basis) {
                    for (xa, ba) in x.iter_mut().zip(b) {
                        *xa += yi * ba;
                    }
                }
                if dist_f64(&x, &self.center) <= self.radius * (1.0 + 1e-12) + 1e-15 && self.pieces[ch.piece].contains_f64(&x, 1e-9) {
                    cands.push((self.objective(&x, t), x));
                }
            }
        }
        let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let mut mins: Vec<Vec<f64>> = Vec::new();
        let mut near: Vec<&(f64, Vec<f64>)> = cands.iter().filter(|c| c.0 <= best + TIE).collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, x) in near {
            if mins.iter().all(|m| dist_f64(m, x) > MERGE) {
                mins.push(x.clone());
            }
        }
        mins.sort_by(|a, b| a.iter().zip(b).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        TiltSolution { value: best, minimizers: mins }
    }
}

/// Critical points of ½yᵀdiag(λ)y + gᵀy on the ball ‖y‖² ≤ r2 and on its sphere.
fn chart_candidates(lam: &[f64], g: &[f64], r2: f64) -> Vec<Vec<f64>> {
    let k = lam.len();
    let mut out = Vec::new();
    if k == 0 {
        out.push(vec![]);
        return out;
    }
    let eps = 1e-12;
    // interior (minimum-norm solution when singular and consistent)
    if lam.iter().zip(g).all(|(l, gi)| l.abs() > eps || gi.abs() <= eps) {
        let y: Vec<f64> = lam.iter().zip(g).map(|(l, gi)| if l.abs() > eps { -gi / l } else { 0.0 }).collect();
        if y.iter().map(|v| v * v).sum::<f64>() <= r2 * (1.0 + 1e-12) {
            out.push(y);
        }
    }
    if r2 <= 0.0 {
        return out;
    }
    // regular sphere points: y_i = −g_i/(λ_i + μ) with Σ y_i² = r2
    for mu in secular_roots(lam, g, r2) {
        out.push(lam.iter().zip(g).map(|(l, gi)| -gi / (l + mu)).collect());
    }
    // degenerate sphere points: μ = −λ_j with g vanishing on that eigenspace
    let mut done: Vec<f64> = Vec::new();
    for &lj in lam {
        if done.iter().any(|d| (d - lj).abs() <= eps) {
            continue;
        }
        done.push(lj);
        let same: Vec<usize> = (0..k).filter(|&i| (lam[i] - lj).abs() <= eps).collect();
        if same.iter().any(|&i| g[i].abs() > eps) {
            continue;
        }
        let mut y = vec![0.0; k];
        for i in 0..k {
            if !same.contains(&i) {
                y[i] = -g[i] / (lam[i] - lj);
            }
        }
        let rho = r2 - y.iter().map(|v| v * v).sum::<f64>();
        if rho < -1e-14 * r2.max(1.0) {
            continue;
        }
        let s = rho.max(0.0).sqrt();
        for dir in sphere_directions(same.len()) {
            let mut z = y.clone();
            for (&i, di) in same.iter().zip(&dir) {
                z[i] = s * di;
            }
            out.push(z);
        }
    }
    out
}

/// Unit directions in an eigenspace of dimension `m`: exact for m = 1, a fixed sample otherwise.
fn sphere_directions(m: usize) -> Vec<Vec<f64>> {
    match m {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..32).map(|k| {
            let a = std::f64::consts::PI * k as f64 / 16.0;
            vec![a.cos(), a.sin()]
        })
        .collect(),
        _ => {
            let mut v = Vec::new();
            for a in -1i32..=1 {
                for b in -1i32..=1 {
                    for c in -1i32..=1 {
                        if (a, b, c) != (0, 0, 0) {
                            let n = ((a * a + b * b + c * c) as f64).sqrt();
                            v.push(vec![a as f64 / n, b as f64 / n, c as f64 / n]);
                        }
                    }
                }
            }
            v
        }
    }
}

/// Real roots μ of ψ(μ) = Σ g_i²/(λ_i + μ)² = r2, away from the poles.
fn secular_roots(lam: &[f64], g: &[f64], r2: f64) -> Vec<f64> {
    let mut poles: Vec<f64> = lam.iter().zip(g).filter(|(_, gi)| gi.abs() > 1e-12).map(|(l, _)| -l).collect();
    if poles.is_empty() {
        return vec![];
    }
    poles.sort_by(|a, b| a.total_cmp(b));
    poles.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let psi = |mu: f64| lam.iter().zip(g).map(|(l, gi)| gi * gi / ((l + mu) * (l + mu))).sum::<f64>() - r2;
    let dpsi = |mu: f64| lam.iter().zip(g).map(|(l, gi)| -2.0 * gi * gi / (l + mu).powi(3)).sum::<f64>();
    let bisect = |mut a: f64, mut b: f64, f: &dyn Fn(f64) -> f64| {
        // f(a) and f(b) have opposite signs; at a pole f(a) is ±∞, which has the right sign
        let fa = f(a);
        let sa = if fa.is_nan() { 1.0 } else { fa.signum() };
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if f(m).signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut roots = Vec::new();
    let scale = 1.0 + poles.iter().map(|p| p.abs()).fold(0.0, f64::max) + g.iter().map(|x| x.abs()).sum::<f64>() / r2.sqrt();
    // left of the first pole ψ increases from −r2 to +∞
    let p0 = poles[0];
    roots.push(bisect(p0 - 2.0 * scale, p0, &psi));
    // right of the last pole ψ decreases from +∞ to −r2
    let pl = *poles.last().expect("nonempty");
    roots.push(bisect(pl, pl + 2.0 * scale, &|m| -psi(m)));
    // between poles ψ is convex with a single minimum
    for w in poles.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = bisect(a, b, &|x| -dpsi(x));
        if psi(m) <= 0.0 {
            roots.push(bisect(a, m, &psi));
            roots.push(bisect(m, b, &|x| -psi(x)));
        }
    }
    roots
}

/// argmin of f − ⟨x*, ·⟩ over B_γ(x̄), all minimizers within 1e−9 of the optimum.
pub fn solve_tilt(inst: &ProblemInstance, tilt: &[f64]) -> Result<TiltSolution, RegularityError> {
    let e = inst.f.as_exact().map_err(|_| RegularityError::NeedsExact)?;
    let solver = TiltSolver::new(e, &inst.xbar, inst.params.gamma)?;
    Ok(solver.solve(tilt))
}

#[derive(Clone, Debug, Serialize)]
pub struct TiltSample {
    /// Offset added to x̄*.
    pub tilt: Vec<f64>,
    pub value: f64,
    pub minimizers: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TiltVerdict {
    Stable {
        #[serde(serialize_with = "serialize_f64")]
        kappa: f64,
    },
    Unstable {
        tilt: Vec<f64>,
        minimizers: Vec<Vec<f64>>,
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct TiltReport {
    pub gamma: f64,
    pub rho: f64,
    pub verdict: TiltVerdict,
    pub tilt_grid: Vec<Vec<f64>>,
    pub argmin_map: Vec<TiltSample>,
}

impl TiltReport {
    pub fn is_stable(&self) -> bool {
        matches!(self.verdict, TiltVerdict::Stable { .. })
    }
}

/// Samples M_γ(x̄* + t) for t on the lattice in B_ρ(0).
///
/// Unstable when some sampled argmin has more than one point or the argmin at
/// t = 0 is not x̄; otherwise κ̂ is the largest sampled difference quotient.
pub fn tilt_stability_verdict(inst: &ProblemInstance) -> Result<TiltReport, RegularityError> {
    let e = inst.f.as_exact().map_err(|_| RegularityError::NeedsExact)?;
    let p = &inst.params;
    let n = e.dim();
    let solver = TiltSolver::new(e, &inst.xbar, p.gamma)?;
    let mut tilts: Vec<Vec<f64>> = Lattice::ball(&zeros(n), p.rho, p.grid).points(0).iter().map(|t| vec_f64(t)).collect();
    // t = 0 first, then by norm, then lexicographic
    let norm = |t: &Vec<f64>| t.iter().map(|x| x * x).sum::<f64>();
    tilts.sort_by(|a, b| norm(a).total_cmp(&norm(b)).then_with(|| a.iter().zip(b).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)));
    let xs = inst.xstar_f64();
    let xb = inst.xbar_f64();
    use rayon::prelude::*;
    let samples: Vec<TiltSample> = tilts
        .par_iter()
        .map(|t| {
            let shifted: Vec<f64> = t.iter().zip(&xs).map(|(a, b)| a + b).collect();
            let s = solver.solve(&shifted);
            TiltSample { tilt: t.clone(), value: s.value, minimizers: s.minimizers }
        })
        .collect();
    let mut verdict = None;
    for s in &samples {
        if s.minimizers.len() != 1 {
            verdict = Some(TiltVerdict::Unstable { tilt: s.tilt.clone(), minimizers: s.minimizers.clone(), reason: "argmin is not a single point".into() });
            break;
        }
        if norm(&s.tilt) == 0.0 && dist_f64(&s.minimizers[0], &xb) > TIE {
            verdict = Some(TiltVerdict::Unstable { tilt: s.tilt.clone(), minimizers: s.minimizers.clone(), reason: "argmin at zero tilt is not the reference point".into() });
            break;
        }
    }
    let verdict = verdict.unwrap_or_else(|| {
        let mut k: f64 = 0.0;
        for i in 0..samples.len() {
            for j in i + 1..samples.len() {
                let dt = dist_f64(&samples[i].tilt, &samples[j].tilt);
                k = k.max(dist_f64(&samples[i].minimizers[0], &samples[j].minimizers[0]) / dt);
            }
        }
        TiltVerdict::Stable { kappa: k }
    });
    Ok(TiltReport { gamma: p.gamma, rho: p.rho, verdict, tilt_grid: tilts, argmin_map: samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secular_equation_one_dimensional() {
        // ½y² + y on |y| ≤ 1/2: sphere points ±1/2
        let mut c = chart_candidates(&[1.0], &[1.0], 0.25);
        c.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(c.len(), 2);
        assert!((c[0][0] + 0.5).abs() < 1e-12 && (c[1][0] - 0.5).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn hard_case_points() {
        // y₁² − y₂² with g = 0 on the unit disk
        let c = chart_candidates(&[2.0, -2.0], &[0.0, 0.0], 1.0);
        assert!(c.iter().any(|y| (y[0].abs() - 1.0).abs() < 1e-12 && y[1].abs() < 1e-12));
        assert!(c.iter().any(|y| (y[1].abs() - 1.0).abs() < 1e-12 && y[0].abs() < 1e-12));
    }
}
