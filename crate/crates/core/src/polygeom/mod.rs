//! Exact polyhedral geometry: cones in both representations, faces, tangent and
//! normal cones to finite unions of polyhedra, projections and distances.

mod cells;
mod cone;
pub mod dd;
pub mod forms;
mod polyhedron;

pub use cells::{Cell, CellComplex, PieceState};
pub use cone::{direction, ConeUnion, PolyCone};
pub use dd::LinearMin;
pub use polyhedron::{ConvexPolyhedron, Face, MAX_PROJECTION_ROWS};
pub(crate) use polyhedron::orthonormalize;

use thiserror::Error;

use crate::rational::{RVec, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("point is not in the set")]
    NotMember,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty polyhedron")]
    Empty,
    #[error("polyhedron has {0} constraints, more than the projection limit")]
    TooManyConstraints(usize),
    #[error("vector is not in the normal cone")]
    NotInNormalCone,
    #[error("union has no pieces")]
    NoPieces,
}

/// A finite union of convex polyhedra in a common space.
#[derive(Clone, Debug)]
pub struct PolyUnion {
    dim: usize,
    pieces: Vec<ConvexPolyhedron>,
}

impl PolyUnion {
    /// Rejects an empty list, mismatched dimensions and empty pieces.
    pub fn new(pieces: Vec<ConvexPolyhedron>) -> Result<Self, GeomError> {
        let dim = pieces.first().ok_or(GeomError::NoPieces)?.dim();
        for p in &pieces {
            if p.dim() != dim {
                return Err(GeomError::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if p.faces().is_empty() {
                return Err(GeomError::Empty);
            }
        }
        Ok(PolyUnion { dim, pieces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn pieces(&self) -> &[ConvexPolyhedron] {
        &self.pieces
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    fn containing(&self, x: &[Rat]) -> Result<Vec<&ConvexPolyhedron>, GeomError> {
        if x.len() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let v: Vec<_> = self.pieces.iter().filter(|p| p.contains(x)).collect();
        if v.is_empty() {
            Err(GeomError::NotMember)
        } else {
            Ok(v)
        }
    }

    /// Cell complex of the tangent cones at `x` of the pieces containing `x`.
    pub fn local_complex(&self, x: &[Rat]) -> Result<CellComplex, GeomError> {
        let cones = self
            .containing(x)?
            .into_iter()
            .map(|p| p.tangent_polyhedron(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CellComplex::build(self.dim, &cones))
    }
}

pub fn active_set(p: &ConvexPolyhedron, x: &[Rat]) -> Result<Vec<usize>, GeomError> {
    p.active_set(x)
}

pub fn normal_cone_convex(p: &ConvexPolyhedron, x: &[Rat]) -> Result<PolyCone, GeomError> {
    p.normal_cone(x)
}

pub fn tangent_cone(p: &ConvexPolyhedron, x: &[Rat]) -> Result<PolyCone, GeomError> {
    p.tangent_cone(x)
}

/// Union of the regular normal cones of the cells adherent to `x`.
pub fn limiting_normal_cone(u: &PolyUnion, x: &[Rat]) -> Result<ConeUnion, GeomError> {
    let cx = u.local_complex(x)?;
    Ok(ConeUnion::reduced(u.dim, cx.cells().iter().map(|c| c.normal.clone()).collect()))
}

/// Intersection of the convex normal cones of the pieces containing `x`.
pub fn regular_normal_cone(u: &PolyUnion, x: &[Rat]) -> Result<PolyCone, GeomError> {
    let mut acc: Option<PolyCone> = None;
    for p in u.containing(x)? {
        let n = p.normal_cone(x)?;
        acc = Some(match acc {
            None => n,
            Some(a) => a.intersect(&n),
        });
    }
    Ok(acc.expect("at least one piece"))
}

pub fn critical_cone(p: &ConvexPolyhedron, x: &[Rat], v: &[Rat]) -> Result<PolyCone, GeomError> {
    if !p.normal_cone(x)?.contains(v) {
        return Err(GeomError::NotInNormalCone);
    }
    let t = p.tangent_cone(x)?;
    Ok(t.intersect(&PolyCone::from_inequalities(p.dim(), vec![], vec![v.to_vec()])))
}

pub fn faces(c: &PolyCone) -> Vec<PolyCone> {
    c.faces()
}

pub fn project(x: &[f64], p: &ConvexPolyhedron) -> Result<Vec<f64>, GeomError> {
    p.project(x)
}

pub fn distance_to_union(x: &[f64], u: &PolyUnion) -> Result<f64, GeomError> {
    let mut best = f64::INFINITY;
    for p in &u.pieces {
        match p.distance(x) {
            Ok(d) => best = best.min(d),
            Err(GeomError::Empty) => {}
            Err(e) => return Err(e),
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(GeomError::Empty)
    }
}

/// Whether ∪`outer` ⊇ ∪`inner` for cones, decided exactly.
pub fn union_covers(outer: &[PolyCone], inner: &[PolyCone]) -> bool {
    let o: Vec<ConvexPolyhedron> = outer.iter().map(|c| (*c.as_polyhedron()).clone()).collect();
    let i: Vec<ConvexPolyhedron> = inner.iter().map(|c| (*c.as_polyhedron()).clone()).collect();
    polyhedra_cover(&o, &i)
}

/// Whether ∪`outer` ⊇ ∪`inner`, by exact set subtraction.
pub fn polyhedra_cover(outer: &[ConvexPolyhedron], inner: &[ConvexPolyhedron]) -> bool {
    inner.iter().all(|p| {
        let dim = p.dim();
        let mut regions: Vec<Region> = vec![Region { le: p.row_pairs(), lt: vec![] }];
        for q in outer {
            let mut next = Vec::new();
            for r in &regions {
                for k in 0..q.rows() {
                    let mut lt = r.lt.clone();
                    lt.push((q.a()[k].iter().map(|x| -x).collect(), -q.b()[k].clone()));
                    let mut le = r.le.clone();
                    for j in 0..k {
                        le.push((q.a()[j].clone(), q.b()[j].clone()));
                    }
                    if dd::feasible_point(dim, &le, &lt, &[]).is_some() {
                        next.push(Region { le, lt });
                    }
                }
            }
            regions = next;
            if regions.is_empty() {
                return true;
            }
        }
        regions.is_empty()
    })
}

/// Exact equality of two finite unions of polyhedra.
pub fn unions_equal(a: &[ConvexPolyhedron], b: &[ConvexPolyhedron]) -> bool {
    polyhedra_cover(a, b) && polyhedra_cover(b, a)
}

#[derive(Clone)]
struct Region {
    le: Vec<(RVec, Rat)>,
    lt: Vec<(RVec, Rat)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rvec};

    fn axis(i: usize) -> ConvexPolyhedron {
        let mut e = vec![int(0), int(0)];
        e[1 - i] = int(1);
        ConvexPolyhedron::from_system(2, vec![], vec![(e, int(0))])
    }

    fn axes() -> PolyUnion {
        PolyUnion::new(vec![axis(0), axis(1)]).unwrap()
    }

    #[test]
    fn axes_limiting_normals() {
        let n = limiting_normal_cone(&axes(), &rvec(&[0, 0])).unwrap();
        assert_eq!(n.pieces().len(), 2);
        assert!(n.contains(&rvec(&[5, 0])) && n.contains(&rvec(&[0, -3])));
        assert!(!n.contains(&rvec(&[1, 1])));
    }

    #[test]
    fn axes_regular_normals() {
        assert!(regular_normal_cone(&axes(), &rvec(&[0, 0])).unwrap().is_zero());
        let n = regular_normal_cone(&axes(), &rvec(&[1, 0])).unwrap();
        assert!(n.contains(&rvec(&[0, 1])) && n.contains(&rvec(&[0, -1])) && !n.contains(&rvec(&[1, 0])));
    }

    #[test]
    fn distance_to_axes() {
        assert!((distance_to_union(&[-1.0, -1.0], &axes()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn union_cover_decision() {
        let quadrant = ConvexPolyhedron::new(vec![rvec(&[-1, 0]), rvec(&[0, -1])], vec![int(0), int(0)], 2).unwrap();
        let upper = ConvexPolyhedron::new(vec![rvec(&[0, -1])], vec![int(0)], 2).unwrap();
        let right = ConvexPolyhedron::new(vec![rvec(&[-1, 0])], vec![int(0)], 2).unwrap();
        assert!(polyhedra_cover(&[upper.clone()], &[quadrant.clone()]));
        assert!(!polyhedra_cover(&[quadrant.clone()], &[upper.clone()]));
        assert!(unions_equal(&[quadrant.clone(), right.clone()], &[right]));
    }

    #[test]
    fn empty_pieces_rejected() {
        let e = ConvexPolyhedron::new(vec![rvec(&[1]), rvec(&[-1])], vec![int(-1), int(0)], 1).unwrap();
        assert_eq!(PolyUnion::new(vec![e]).unwrap_err(), GeomError::Empty);
    }
}
