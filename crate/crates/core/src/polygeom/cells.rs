use super::{dd, ConvexPolyhedron, PolyCone};
use crate::rational::{RVec, Rat};

/// How a cell sits relative to one piece of the source union.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PieceState {
    /// Inside the piece, on the face with this closed active set.
    Face(Vec<usize>),
    /// Outside the piece; `row` is the first violated constraint.
    Outside { row: usize },
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub signature: Vec<PieceState>,
    pub closure: ConvexPolyhedron,
    /// A point of the cell where the signature is attained.
    pub point: RVec,
    /// Regular normal cone of the union, constant along the cell.
    pub normal: PolyCone,
}

/// Decomposition of a polyhedral union by constraint-activity signature.
#[derive(Clone, Debug)]
pub struct CellComplex {
    dim: usize,
    cells: Vec<Cell>,
}

struct Acc {
    le: Vec<(RVec, Rat)>,
    lt: Vec<(RVec, Rat)>,
    eq: Vec<(RVec, Rat)>,
}

impl CellComplex {
    pub fn build(dim: usize, pieces: &[ConvexPolyhedron]) -> Self {
        let mut cells = Vec::new();
        let mut sig = Vec::new();
        let acc = Acc { le: vec![], lt: vec![], eq: vec![] };
        walk(dim, pieces, 0, &acc, &mut sig, &mut cells);
        CellComplex { dim, cells }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Cells whose closure contains `x`.
    pub fn adherent<'a>(&'a self, x: &'a [Rat]) -> impl Iterator<Item = &'a Cell> + 'a {
        self.cells.iter().filter(move |c| c.closure.contains(x))
    }
}

fn walk(dim: usize, pieces: &[ConvexPolyhedron], i: usize, acc: &Acc, sig: &mut Vec<PieceState>, out: &mut Vec<Cell>) {
    if i == pieces.len() {
        let Some(point) = dd::feasible_point(dim, &acc.le, &acc.lt, &acc.eq) else {
            return;
        };
        let mut normal: Option<PolyCone> = None;
        for (p, s) in pieces.iter().zip(sig.iter()) {
            if let PieceState::Face(act) = s {
                let n = PolyCone::from_generators(dim, act.iter().map(|&j| p.a()[j].clone()).collect(), vec![]);
                normal = Some(match normal {
                    None => n,
                    Some(m) => m.intersect(&n),
                });
            }
        }
        let Some(normal) = normal else {
            return;
        };
        let mut le = acc.le.clone();
        le.extend(acc.lt.iter().cloned());
        let closure = ConvexPolyhedron::from_system(dim, le, acc.eq.clone());
        out.push(Cell { signature: sig.clone(), closure, point, normal });
        return;
    }
    let p = &pieces[i];
    let rows = p.row_pairs();
    for face in p.faces() {
        let mut next = Acc { le: acc.le.clone(), lt: acc.lt.clone(), eq: acc.eq.clone() };
        for (j, r) in rows.iter().enumerate() {
            if face.active.contains(&j) {
                next.eq.push(r.clone());
            } else {
                next.lt.push(r.clone());
            }
        }
        if dd::feasible_point(dim, &next.le, &next.lt, &next.eq).is_some() {
            sig.push(PieceState::Face(face.active.clone()));
            walk(dim, pieces, i + 1, &next, sig, out);
            sig.pop();
        }
    }
    for (r, (a, b)) in rows.iter().enumerate() {
        let mut next = Acc { le: acc.le.clone(), lt: acc.lt.clone(), eq: acc.eq.clone() };
        next.lt.push((a.iter().map(|x| -x).collect(), -b.clone()));
        next.le.extend(rows[..r].iter().cloned());
        if dd::feasible_point(dim, &next.le, &next.lt, &next.eq).is_some() {
            sig.push(PieceState::Outside { row: r });
            walk(dim, pieces, i + 1, &next, sig, out);
            sig.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rvec};

    #[test]
    fn overlapping_half_planes_have_no_spurious_normals() {
        // {x2 <= 0} ∪ {x1 >= 0}: at (1,0) the point is interior to the second piece.
        let p1 = ConvexPolyhedron::new(vec![rvec(&[0, 1])], vec![int(0)], 2).unwrap();
        let p2 = ConvexPolyhedron::new(vec![rvec(&[-1, 0])], vec![int(0)], 2).unwrap();
        let cx = CellComplex::build(2, &[p1, p2]);
        let x = rvec(&[1, 0]);
        assert!(cx.adherent(&x).all(|c| c.normal.is_zero()));
        let y = rvec(&[-1, 0]);
        assert!(cx.adherent(&y).any(|c| c.normal.contains(&rvec(&[0, 1]))));
    }

    #[test]
    fn wedge_has_four_cells() {
        let w = ConvexPolyhedron::new(vec![rvec(&[-1, 1]), rvec(&[-1, -1])], vec![int(0), int(0)], 2).unwrap();
        let cx = CellComplex::build(2, &[w]);
        assert_eq!(cx.cells().len(), 4);
    }
}
