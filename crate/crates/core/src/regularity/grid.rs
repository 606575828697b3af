//! Nested rational lattices on balls intersected with finite unions of polyhedra.
//!
//! Every face of every piece gets its own lattice in an orthogonal rational
//! basis of the face's affine hull. Steps are fixed at level 0 and halved at
//! each level, so the point set at level `L` contains the one at level `L − 1`.

use std::collections::BTreeSet;

use num::Zero;
use serde::Serialize;

use crate::polygeom::ConvexPolyhedron;
use crate::rational::{approx_f64, dot, int, norm2, primitive, project_affine, sub, to_f64, RVec, Rat};

/// Radius, points per radius at level 0, and refinement level of a lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub radius: f64,
    pub density: usize,
    pub refinement_level: usize,
}

#[derive(Clone, Debug)]
struct Chart {
    origin: RVec,
    /// Orthogonal direction vectors, each already multiplied by its level-0 step.
    steps: Vec<RVec>,
    piece: usize,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    center: RVec,
    radius: Rat,
    radius_f64: f64,
    density: usize,
    pieces: Vec<ConvexPolyhedron>,
    charts: Vec<Chart>,
}

/// Rational radius used for exact ball membership.
pub fn rational_radius(r: f64) -> Rat {
    approx_f64(r, 1_000_000_000)
}

fn gram_schmidt(vs: &[RVec]) -> Vec<RVec> {
    let mut out: Vec<RVec> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for b in &out {
            let c = dot(&w, b) / norm2(b);
            w = w.iter().zip(b).map(|(x, y)| x - &c * y).collect();
        }
        if w.iter().any(|x| !x.is_zero()) {
            out.push(primitive(&w));
        }
    }
    out
}

impl Lattice {
    /// Lattice on `B_radius(center) ∩ (∪ pieces)`.
    pub fn over(pieces: &[ConvexPolyhedron], center: &[Rat], radius: f64, density: usize) -> Self {
        let r = rational_radius(radius);
        let r2 = &r * &r;
        let mut charts = Vec::new();
        let mut seen: BTreeSet<(RVec, Vec<RVec>)> = BTreeSet::new();
        for (pi, p) in pieces.iter().enumerate() {
            for f in p.faces() {
                let rows: Vec<RVec> = f.active.iter().map(|&i| p.a()[i].clone()).collect();
                let rhs: RVec = f.active.iter().map(|&i| p.b()[i].clone()).collect();
                let Some(origin) = project_affine(&rows, &rhs, center) else {
                    continue;
                };
                let d = sub(&origin, center);
                if norm2(&d) > r2 {
                    continue;
                }
                let hull = ConvexPolyhedron::full(p.dim()).with_rows(vec![], rows.iter().cloned().zip(rhs.iter().cloned()).collect());
                let basis = gram_schmidt(&hull.affine_hull().map(|h| h.1).unwrap_or_default());
                if !seen.insert((origin.clone(), basis.clone())) {
                    continue;
                }
                let steps = basis
                    .iter()
                    .map(|b| {
                        let len = to_f64(&norm2(b)).sqrt();
                        let t = approx_f64(radius / (density as f64 * len), 1_000_000_000);
                        b.iter().map(|x| x * &t).collect()
                    })
                    .collect();
                charts.push(Chart { origin, steps, piece: pi });
            }
        }
        Lattice { center: center.to_vec(), radius: r, radius_f64: radius, density, pieces: pieces.to_vec(), charts }
    }

    /// Lattice on the whole ball.
    pub fn ball(center: &[Rat], radius: f64, density: usize) -> Self {
        Self::over(&[ConvexPolyhedron::full(center.len())], center, radius, density)
    }

    pub fn spec(&self, level: usize) -> GridSpec {
        GridSpec { radius: self.radius_f64, density: self.density, refinement_level: level }
    }

    /// Upper bound on the number of candidate points at `level`.
    pub fn size_bound(&self, level: usize) -> usize {
        let k = 2 * self.density * (1 << level) + 1;
        self.charts.iter().map(|c| k.saturating_pow(c.steps.len() as u32)).fold(0usize, |a, b| a.saturating_add(b))
    }

    /// Largest level not above `max_level` whose size bound stays within `budget` (at least 0).
    pub fn level_within(&self, max_level: usize, budget: usize) -> usize {
        (0..=max_level).rev().find(|&l| self.size_bound(l) <= budget).unwrap_or(0)
    }

    /// Sorted, deduplicated lattice points at `level`.
    pub fn points(&self, level: usize) -> Vec<RVec> {
        let kmax = (self.density << level) as i64;
        let denom = int(1 << level);
        let r2 = &self.radius * &self.radius;
        let mut out: BTreeSet<RVec> = BTreeSet::new();
        for ch in &self.charts {
            let k = ch.steps.len();
            let scaled: Vec<RVec> = ch.steps.iter().map(|s| s.iter().map(|x| x / &denom).collect()).collect();
            let mut idx = vec![-kmax; k];
            loop {
                let mut x = ch.origin.clone();
                for (c, s) in idx.iter().zip(&scaled) {
                    if *c != 0 {
                        let c = int(*c);
                        for (xi, si) in x.iter_mut().zip(s) {
                            *xi += &c * si;
                        }
                    }
                }
                if norm2(&sub(&x, &self.center)) <= r2 && self.pieces[ch.piece].contains(&x) {
                    out.insert(x);
                }
                // odometer
                let mut j = 0;
                while j < k {
                    idx[j] += 1;
                    if idx[j] <= kmax {
                        break;
                    }
                    idx[j] = -kmax;
                    j += 1;
                }
                if j == k {
                    break;
                }
            }
        }
        out.into_iter().collect()
    }
}

/// Two successive refinement values agree within 2% relative.
pub fn agree(prev: f64, cur: f64) -> bool {
    if prev == cur {
        return true;
    }
    if !prev.is_finite() || !cur.is_finite() {
        return false;
    }
    (cur - prev).abs() <= 0.02 * cur.abs().max(prev.abs())
}

/// Uniform grid of `count` points on `[lo, hi]`.
pub fn uniform_1d(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 || hi <= lo {
        return vec![lo];
    }
    let h = (hi - lo) / (count - 1) as f64;
    (0..count).map(|k| if k + 1 == count { hi } else { lo + h * k as f64 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, rvec};

    #[test]
    fn nested_levels() {
        let l = Lattice::ball(&rvec(&[0, 0]), 0.1, 2);
        let a = l.points(0);
        let b = l.points(1);
        assert!(a.iter().all(|p| b.contains(p)));
        assert!(a.contains(&vec![frac(1, 10), Rat::zero()]));
        assert!(b.len() > a.len());
    }

    #[test]
    fn lower_dimensional_pieces_are_gridded() {
        // the two coordinate axes
        let ax = |i: usize| {
            let mut e = vec![Rat::zero(), Rat::zero()];
            e[i] = int(1);
            ConvexPolyhedron::from_system(2, vec![], vec![(e, Rat::zero())])
        };
        let l = Lattice::over(&[ax(0), ax(1)], &rvec(&[0, 0]), 0.1, 4);
        let pts = l.points(0);
        assert_eq!(pts.len(), 17);
        assert!(pts.iter().all(|p| p[0].is_zero() || p[1].is_zero()));
    }

    #[test]
    fn agreement() {
        assert!(agree(1.0, 1.01));
        assert!(!agree(1.0, 1.1));
        assert!(agree(f64::INFINITY, f64::INFINITY));
    }
}
