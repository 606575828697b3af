use std::fmt;
use std::sync::{Arc, OnceLock};

use super::dd::{self, LinearMin};
use super::{GeomError, PolyCone};
use crate::rational::{dot, null_space, project_affine, to_f64, vec_f64, zeros, RVec, Rat};

/// Largest constraint count accepted by the enumerative projection.
pub const MAX_PROJECTION_ROWS: usize = 20;

/// {x : Ax ≤ b} with rational data.
#[derive(Clone)]
pub struct ConvexPolyhedron {
    dim: usize,
    a: Vec<RVec>,
    b: RVec,
    faces: OnceLock<Arc<Vec<Face>>>,
    proj: OnceLock<Arc<Vec<FaceChart>>>,
}

/// A nonempty face, identified by its closed active set, with a point of its relative interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub active: Vec<usize>,
    pub point: RVec,
}

/// Float description of a face's affine hull: `origin + span(basis)`, basis orthonormal.
#[derive(Clone, Debug)]
struct FaceChart {
    origin: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl fmt::Debug for ConvexPolyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexPolyhedron").field("dim", &self.dim).field("a", &self.a).field("b", &self.b).finish()
    }
}

impl PartialEq for ConvexPolyhedron {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && self.a == o.a && self.b == o.b
    }
}

impl ConvexPolyhedron {
    pub fn new(a: Vec<RVec>, b: RVec, dim: usize) -> Result<Self, GeomError> {
        if a.len() != b.len() {
            return Err(GeomError::DimensionMismatch { expected: a.len(), got: b.len() });
        }
        if let Some(r) = a.iter().find(|r| r.len() != dim) {
            return Err(GeomError::DimensionMismatch { expected: dim, got: r.len() });
        }
        Ok(Self::from_parts(dim, a, b))
    }

    pub(crate) fn from_parts(dim: usize, a: Vec<RVec>, b: RVec) -> Self {
        ConvexPolyhedron { dim, a, b, faces: OnceLock::new(), proj: OnceLock::new() }
    }

    /// All of Rⁿ (no constraints).
    pub fn full(dim: usize) -> Self {
        Self::from_parts(dim, vec![], vec![])
    }

    /// Builds from inequality rows plus equality rows (each equality becomes two rows).
    pub fn from_system(dim: usize, le: Vec<(RVec, Rat)>, eq: Vec<(RVec, Rat)>) -> Self {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (r, c) in le {
            a.push(r);
            b.push(c);
        }
        for (r, c) in eq {
            a.push(r.iter().map(|x| -x).collect());
            b.push(-c.clone());
            a.push(r);
            b.push(c);
        }
        Self::from_parts(dim, a, b)
    }

    /// Axis-aligned box `center ± radius`.
    pub fn cube(center: &[Rat], radius: &Rat) -> Self {
        let n = center.len();
        let mut le = Vec::new();
        for i in 0..n {
            let mut e = zeros(n);
            e[i] = Rat::from_integer(1.into());
            le.push((e.clone(), &center[i] + radius));
            le.push((e.iter().map(|x| -x).collect(), radius - &center[i]));
        }
        Self::from_system(n, le, vec![])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn a(&self) -> &[RVec] {
        &self.a
    }
    pub fn b(&self) -> &[Rat] {
        &self.b
    }
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn row_pairs(&self) -> Vec<(RVec, Rat)> {
        self.a.iter().cloned().zip(self.b.iter().cloned()).collect()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.a.iter().zip(&self.b).all(|(r, b)| dot(r, x) <= *b)
    }

    pub fn contains_f64(&self, x: &[f64], tol: f64) -> bool {
        self.a.iter().zip(&self.b).all(|(r, b)| {
            let s: f64 = r.iter().zip(x).map(|(a, y)| to_f64(a) * y).sum();
            s <= to_f64(b) + tol
        })
    }

    pub fn active_set(&self, x: &[Rat]) -> Result<Vec<usize>, GeomError> {
        if x.len() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if !self.contains(x) {
            return Err(GeomError::NotMember);
        }
        Ok((0..self.a.len()).filter(|&i| dot(&self.a[i], x) == self.b[i]).collect())
    }

    /// Some point of the polyhedron, if nonempty.
    pub fn point(&self) -> Option<RVec> {
        self.faces().first().map(|f| f.point.clone())
    }

    pub fn is_empty(&self) -> bool {
        dd::feasible_point(self.dim, &self.row_pairs(), &[], &[]).is_none()
    }

    /// Nonempty faces, the polyhedron itself first (smallest active set).
    pub fn faces(&self) -> &[Face] {
        self.faces.get_or_init(|| Arc::new(enumerate_faces(self.dim, &self.a, &self.b)))
    }

    /// Rows holding with equality everywhere on the polyhedron.
    pub fn implicit_equalities(&self) -> Vec<usize> {
        self.faces().first().map(|f| f.active.clone()).unwrap_or_default()
    }

    /// Dimension of the affine hull; `None` when empty.
    pub fn affine_dim(&self) -> Option<usize> {
        let f = self.faces().first()?;
        let rows: Vec<RVec> = f.active.iter().map(|&i| self.a[i].clone()).collect();
        Some(null_space(&rows, self.dim).len())
    }

    /// Affine hull as a point plus a rational basis of the direction space.
    pub fn affine_hull(&self) -> Option<(RVec, Vec<RVec>)> {
        let f = self.faces().first()?;
        let rows: Vec<RVec> = f.active.iter().map(|&i| self.a[i].clone()).collect();
        let rhs: RVec = f.active.iter().map(|&i| self.b[i].clone()).collect();
        let p = project_affine(&rows, &rhs, &zeros(self.dim))?;
        Some((p, null_space(&rows, self.dim)))
    }

    pub fn intersect(&self, o: &ConvexPolyhedron) -> ConvexPolyhedron {
        let mut a = self.a.clone();
        a.extend(o.a.iter().cloned());
        let mut b = self.b.clone();
        b.extend(o.b.iter().cloned());
        Self::from_parts(self.dim, a, b)
    }

    pub fn with_rows(&self, le: Vec<(RVec, Rat)>, eq: Vec<(RVec, Rat)>) -> ConvexPolyhedron {
        self.intersect(&Self::from_system(self.dim, le, eq))
    }

    /// The set shifted by `t`.
    pub fn translate(&self, t: &[Rat]) -> ConvexPolyhedron {
        let b = self.a.iter().zip(&self.b).map(|(r, b)| b + dot(r, t)).collect();
        Self::from_parts(self.dim, self.a.clone(), b)
    }

    pub fn minimize(&self, c: &[Rat]) -> LinearMin {
        dd::minimize_linear(self.dim, c, &self.row_pairs(), &[])
    }

    pub fn tangent_cone(&self, x: &[Rat]) -> Result<PolyCone, GeomError> {
        let act = self.active_set(x)?;
        Ok(PolyCone::from_inequalities(self.dim, act.iter().map(|&i| self.a[i].clone()).collect(), vec![]))
    }

    pub fn normal_cone(&self, x: &[Rat]) -> Result<PolyCone, GeomError> {
        let act = self.active_set(x)?;
        Ok(PolyCone::from_generators(self.dim, act.iter().map(|&i| self.a[i].clone()).collect(), vec![]))
    }

    /// The cone {d : A_i d ≤ 0, i active at x} as a polyhedron with zero right-hand side.
    pub fn tangent_polyhedron(&self, x: &[Rat]) -> Result<ConvexPolyhedron, GeomError> {
        let act = self.active_set(x)?;
        Ok(Self::from_parts(self.dim, act.iter().map(|&i| self.a[i].clone()).collect(), zeros(act.len())))
    }

    /// Euclidean projection by enumeration of face affine hulls.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, GeomError> {
        if x.len() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if self.a.len() > MAX_PROJECTION_ROWS {
            return Err(GeomError::TooManyConstraints(self.a.len()));
        }
        let charts = self.proj.get_or_init(|| Arc::new(self.charts()));
        if charts.is_empty() {
            return Err(GeomError::Empty);
        }
        let af: Vec<Vec<f64>> = self.a.iter().map(|r| vec_f64(r)).collect();
        let bf: Vec<f64> = vec_f64(&self.b);
        let scale = 1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut fallback: Option<(f64, Vec<f64>)> = None;
        for ch in charts.iter() {
            let y = ch.project(x);
            let d2: f64 = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum();
            let viol = af
                .iter()
                .zip(&bf)
                .map(|(r, b)| r.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() - b)
                .fold(0.0, f64::max);
            if viol <= 1e-11 * scale {
                if best.as_ref().is_none_or(|(d, _)| d2 < *d) {
                    best = Some((d2, y));
                }
            } else if fallback.as_ref().is_none_or(|(v, _)| viol < *v) {
                fallback = Some((viol, y));
            }
        }
        Ok(best.or(fallback).map(|(_, y)| y).expect("nonempty"))
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64, GeomError> {
        let p = self.project(x)?;
        Ok(x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }

    fn charts(&self) -> Vec<FaceChart> {
        self.faces()
            .iter()
            .map(|f| {
                let rows: Vec<RVec> = f.active.iter().map(|&i| self.a[i].clone()).collect();
                let rhs: RVec = f.active.iter().map(|&i| self.b[i].clone()).collect();
                let origin = project_affine(&rows, &rhs, &zeros(self.dim)).expect("face is nonempty");
                let basis = orthonormalize(null_space(&rows, self.dim).iter().map(|v| vec_f64(v)).collect());
                FaceChart { origin: vec_f64(&origin), basis }
            })
            .collect()
    }

    /// Exact Lagrangian check of a candidate projection `p` of `x`.
    pub fn kkt_residual(&self, x: &[f64], p: &[f64]) -> f64 {
        let r: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
        let scale = 1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let active: Vec<RVec> = self
            .a
            .iter()
            .zip(&self.b)
            .filter(|(row, b)| {
                let s: f64 = row.iter().zip(p).map(|(a, y)| to_f64(a) * y).sum();
                (s - to_f64(b)).abs() <= 1e-9 * scale
            })
            .map(|(row, _)| row.clone())
            .collect();
        let cone = PolyCone::from_generators(self.dim, active, vec![]);
        let q = cone.project_f64(&r);
        r.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

impl FaceChart {
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.origin).map(|(a, b)| a - b).collect();
        let mut y = self.origin.clone();
        for q in &self.basis {
            let c: f64 = q.iter().zip(&d).map(|(a, b)| a * b).sum();
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi += c * qi;
            }
        }
        y
    }
}

pub(crate) fn orthonormalize(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in vs {
        for _ in 0..2 {
            for q in &out {
                let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

fn enumerate_faces(dim: usize, a: &[RVec], b: &[Rat]) -> Vec<Face> {
    let m = a.len();
    let Some(root) = dd::feasible_point(dim, &pairs(a, b, 0..m), &[], &[]) else {
        return vec![];
    };
    let mut out = Vec::new();
    let mut state = vec![Status::Free; m];
    dfs(dim, a, b, 0, &mut state, root, &mut out);
    out.sort_by(|x, y| x.active.len().cmp(&y.active.len()).then_with(|| x.active.cmp(&y.active)));
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Free,
    Active,
    Strict,
}

fn pairs(a: &[RVec], b: &[Rat], idx: impl Iterator<Item = usize>) -> Vec<(RVec, Rat)> {
    idx.map(|i| (a[i].clone(), b[i].clone())).collect()
}

fn solve_state(dim: usize, a: &[RVec], b: &[Rat], st: &[Status]) -> Option<RVec> {
    let m = a.len();
    let le = pairs(a, b, (0..m).filter(|&i| st[i] == Status::Free));
    let lt = pairs(a, b, (0..m).filter(|&i| st[i] == Status::Strict));
    let eq = pairs(a, b, (0..m).filter(|&i| st[i] == Status::Active));
    dd::feasible_point(dim, &le, &lt, &eq)
}

fn dfs(dim: usize, a: &[RVec], b: &[Rat], i: usize, st: &mut Vec<Status>, witness: RVec, out: &mut Vec<Face>) {
    if i == a.len() {
        let active = (0..a.len()).filter(|&j| st[j] == Status::Active).collect();
        out.push(Face { active, point: witness });
        return;
    }
    let tight = dot(&a[i], &witness) == b[i];
    for s in [Status::Active, Status::Strict] {
        st[i] = s;
        let w = if (s == Status::Active) == tight { Some(witness.clone()) } else { solve_state(dim, a, b, st) };
        if let Some(w) = w {
            dfs(dim, a, b, i + 1, st, w, out);
        }
    }
    st[i] = Status::Free;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int, rvec};

    fn wedge() -> ConvexPolyhedron {
        ConvexPolyhedron::new(vec![rvec(&[-1, 1]), rvec(&[-1, -1])], vec![int(0), int(0)], 2).unwrap()
    }

    #[test]
    fn wedge_faces() {
        let f = wedge();
        let act: Vec<Vec<usize>> = f.faces().iter().map(|f| f.active.clone()).collect();
        assert_eq!(act, vec![vec![], vec![0], vec![1], vec![0, 1]]);
    }

    #[test]
    fn active_sets() {
        let w = wedge();
        assert_eq!(w.active_set(&rvec(&[0, 0])).unwrap(), vec![0, 1]);
        assert_eq!(w.active_set(&rvec(&[1, 1])).unwrap(), vec![0]);
        assert_eq!(w.active_set(&rvec(&[0, 1])), Err(GeomError::NotMember));
    }

    #[test]
    fn projection_onto_wedge() {
        let p = wedge().project(&[0.0, 1.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14);
        let d = wedge().distance(&[0.0, 1.0]).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(wedge().kkt_residual(&[0.0, 1.0], &p) < 1e-10);
    }

    #[test]
    fn affine_hull_of_segment() {
        let seg = ConvexPolyhedron::from_system(2, vec![(rvec(&[1, 0]), int(1)), (rvec(&[-1, 0]), int(0))], vec![(rvec(&[1, -1]), int(0))]);
        assert_eq!(seg.affine_dim(), Some(1));
        assert_eq!(seg.faces().len(), 3);
        let (p, basis) = seg.affine_hull().unwrap();
        assert_eq!(p, vec![int(0), int(0)]);
        assert_eq!(basis, vec![rvec(&[1, 1])]);
        let _ = frac(1, 2);
    }
}
