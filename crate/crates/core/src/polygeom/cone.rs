use std::fmt;
use std::sync::{Arc, OnceLock};

use num::{Signed, Zero};

use super::dd::{self, Generators};
use super::ConvexPolyhedron;
use crate::rational::{dot, fmt_rat, is_zero_vec, primitive, rank, zeros, RVec, Rat};

/// Polyhedral convex cone kept in both forms:
/// `{u : ineq·u ≤ 0, eq·u = 0}` and `cone(rays) + span(lines)`.
#[derive(Clone)]
pub struct PolyCone {
    dim: usize,
    ineq: Vec<RVec>,
    eq: Vec<RVec>,
    gens: Generators,
    chart: OnceLock<Arc<ConvexPolyhedron>>,
}

impl fmt::Debug for PolyCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |vs: &[RVec]| vs.iter().map(|v| format!("({})", v.iter().map(fmt_rat).collect::<Vec<_>>().join(","))).collect::<Vec<_>>().join(" ");
        write!(f, "PolyCone[rays: {}; lines: {}]", show(&self.gens.rays), show(&self.gens.lines))
    }
}

impl PolyCone {
    pub fn from_inequalities(dim: usize, ineq: Vec<RVec>, eq: Vec<RVec>) -> Self {
        let gens = dd::generators(dim, &ineq, &eq);
        PolyCone { dim, ineq, eq, gens, chart: OnceLock::new() }
    }

    pub fn from_generators(dim: usize, rays: Vec<RVec>, lines: Vec<RVec>) -> Self {
        let rays: Vec<RVec> = rays.into_iter().filter(|r| !is_zero_vec(r)).collect();
        let lines: Vec<RVec> = lines.into_iter().filter(|r| !is_zero_vec(r)).collect();
        let polar = dd::generators(dim, &rays, &lines);
        let gens = dd::generators(dim, &polar.rays, &polar.lines);
        PolyCone { dim, ineq: polar.rays, eq: polar.lines, gens, chart: OnceLock::new() }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_generators(dim, vec![], vec![])
    }

    pub fn full(dim: usize) -> Self {
        Self::from_inequalities(dim, vec![], vec![])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn rays(&self) -> &[RVec] {
        &self.gens.rays
    }
    pub fn lines(&self) -> &[RVec] {
        &self.gens.lines
    }
    pub fn inequalities(&self) -> &[RVec] {
        &self.ineq
    }
    pub fn equalities(&self) -> &[RVec] {
        &self.eq
    }

    /// Every generator, lines in both directions.
    pub fn spanning_vectors(&self) -> Vec<RVec> {
        let mut v = self.gens.rays.clone();
        for l in &self.gens.lines {
            v.push(l.clone());
            v.push(l.iter().map(|x| -x).collect());
        }
        v
    }

    pub fn contains(&self, u: &[Rat]) -> bool {
        self.ineq.iter().all(|g| !dot(g, u).is_positive()) && self.eq.iter().all(|e| dot(e, u).is_zero())
    }

    pub fn contains_cone(&self, o: &PolyCone) -> bool {
        o.gens.rays.iter().all(|r| self.contains(r)) && o.gens.lines.iter().all(|l| self.contains(l) && self.contains(&neg(l)))
    }

    pub fn set_eq(&self, o: &PolyCone) -> bool {
        self.contains_cone(o) && o.contains_cone(self)
    }

    pub fn is_zero(&self) -> bool {
        self.gens.rays.is_empty() && self.gens.lines.is_empty()
    }

    /// Linear dimension of the cone.
    pub fn cone_dim(&self) -> usize {
        let mut v = self.gens.rays.clone();
        v.extend(self.gens.lines.iter().cloned());
        rank(&v, self.dim)
    }

    pub fn polar(&self) -> PolyCone {
        PolyCone::from_inequalities(self.dim, self.gens.rays.clone(), self.gens.lines.clone())
    }

    pub fn intersect(&self, o: &PolyCone) -> PolyCone {
        let mut ineq = self.ineq.clone();
        ineq.extend(o.ineq.iter().cloned());
        let mut eq = self.eq.clone();
        eq.extend(o.eq.iter().cloned());
        PolyCone::from_inequalities(self.dim, ineq, eq)
    }

    /// Minimal inequality description, computed from the polar's generators.
    pub fn facets(&self) -> (Vec<RVec>, Vec<RVec>) {
        let p = dd::generators(self.dim, &self.gens.rays, &self.gens.lines);
        (p.rays, p.lines)
    }

    /// Cone of feasible directions at `v ∈ C`.
    pub fn tangent_at(&self, v: &[Rat]) -> PolyCone {
        let (f, e) = self.facets();
        let act = f.into_iter().filter(|g| dot(g, v).is_zero()).collect();
        PolyCone::from_inequalities(self.dim, act, e)
    }

    /// All nonempty faces, from the cone itself down to its lineality space.
    pub fn faces(&self) -> Vec<PolyCone> {
        let (f, e) = self.facets();
        let poly = ConvexPolyhedron::from_system(self.dim, f.iter().map(|g| (g.clone(), Rat::zero())).collect(), vec![]);
        let mut out: Vec<PolyCone> = poly
            .faces()
            .iter()
            .map(|face| {
                let mut eq = e.clone();
                eq.extend(face.active.iter().map(|&i| f[i].clone()));
                PolyCone::from_inequalities(self.dim, f.clone(), eq)
            })
            .collect();
        out.sort_by_key(|c| std::cmp::Reverse(c.cone_dim()));
        out
    }

    /// A point of the relative interior (sum of all generators).
    pub fn relint_point(&self) -> RVec {
        let mut s = zeros(self.dim);
        for r in &self.gens.rays {
            for (x, y) in s.iter_mut().zip(r) {
                *x += y;
            }
        }
        s
    }

    pub fn as_polyhedron(&self) -> Arc<ConvexPolyhedron> {
        self.chart
            .get_or_init(|| {
                let (f, e) = self.facets();
                Arc::new(ConvexPolyhedron::from_system(
                    self.dim,
                    f.into_iter().map(|g| (g, Rat::zero())).collect(),
                    e.into_iter().map(|g| (g, Rat::zero())).collect(),
                ))
            })
            .clone()
    }

    pub fn project_f64(&self, v: &[f64]) -> Vec<f64> {
        if self.is_zero() {
            return vec![0.0; self.dim];
        }
        self.as_polyhedron().project(v).expect("cones are nonempty")
    }

    pub fn distance_f64(&self, v: &[f64]) -> f64 {
        let p = self.project_f64(v);
        v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// Preimage {x : M x ∈ C} under a rational linear map `m` (rows of M).
    pub fn preimage(&self, m: &[RVec], dom: usize) -> PolyCone {
        let map = |g: &RVec| -> RVec { (0..dom).map(|j| m.iter().zip(g).map(|(row, gi)| gi * &row[j]).sum()).collect() };
        PolyCone::from_inequalities(dom, self.ineq.iter().map(map).collect(), self.eq.iter().map(map).collect())
    }
}

fn neg(v: &[Rat]) -> RVec {
    v.iter().map(|x| -x).collect()
}

/// A finite union of polyhedral cones.
#[derive(Clone, Debug)]
pub struct ConeUnion {
    dim: usize,
    pieces: Vec<PolyCone>,
}

impl ConeUnion {
    pub fn new(dim: usize, pieces: Vec<PolyCone>) -> Self {
        ConeUnion { dim, pieces }
    }

    /// Drops pieces equal to or contained in another piece.
    pub fn reduced(dim: usize, cones: Vec<PolyCone>) -> Self {
        let mut keep: Vec<PolyCone> = Vec::new();
        for c in cones {
            if keep.iter().any(|k| k.contains_cone(&c)) {
                continue;
            }
            keep.retain(|k| !c.contains_cone(k));
            keep.push(c);
        }
        ConeUnion { dim, pieces: keep }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn pieces(&self) -> &[PolyCone] {
        &self.pieces
    }

    pub fn contains(&self, u: &[Rat]) -> bool {
        self.pieces.iter().any(|c| c.contains(u))
    }

    pub fn distance_f64(&self, v: &[f64]) -> f64 {
        self.pieces.iter().map(|c| c.distance_f64(v)).fold(f64::INFINITY, f64::min)
    }

    /// Exact set equality of two cone unions.
    pub fn set_eq(&self, o: &ConeUnion) -> bool {
        super::union_covers(&o.pieces, &self.pieces) && super::union_covers(&self.pieces, &o.pieces)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(PolyCone::is_zero)
    }
}

/// Nonzero primitive direction of `v`.
pub fn direction(v: &[Rat]) -> Option<RVec> {
    (!is_zero_vec(v)).then(|| primitive(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rvec;

    fn wedge_normal() -> PolyCone {
        PolyCone::from_generators(2, vec![rvec(&[-1, 1]), rvec(&[-1, -1])], vec![])
    }

    #[test]
    fn polar_of_wedge_normal_is_wedge() {
        let p = wedge_normal().polar();
        assert!(p.contains(&rvec(&[1, 1])) && p.contains(&rvec(&[1, -1])));
        assert!(!p.contains(&rvec(&[0, 1])));
        assert!(p.polar().set_eq(&wedge_normal()));
    }

    #[test]
    fn face_counts() {
        assert_eq!(wedge_normal().faces().len(), 4);
        assert_eq!(PolyCone::zero(2).faces().len(), 1);
        let half = PolyCone::from_inequalities(2, vec![rvec(&[0, -1])], vec![]);
        let faces = half.faces();
        assert_eq!(faces.len(), 2);
        assert_eq!(faces[1].lines().len(), 1);
        assert!(faces[1].rays().is_empty());
    }

    #[test]
    fn projection_onto_cone() {
        let d = wedge_normal().distance_f64(&[1.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reduced_union_drops_nested() {
        let axis = PolyCone::from_generators(2, vec![], vec![rvec(&[1, 0])]);
        let u = ConeUnion::reduced(2, vec![PolyCone::zero(2), axis.clone(), axis]);
        assert_eq!(u.pieces().len(), 1);
    }
}
