//! Double description conversion from inequalities to generators, with exact
//! feasibility and linear minimization built on top of it.

use std::collections::HashSet;

use num::{Signed, Zero};

use crate::rational::{dot, is_zero_vec, primitive, primitive_line, project_affine, rref, zeros, RVec, Rat};

/// Generators of a polyhedral cone: cone(rays) + span(lines).
/// Rays are primitive integer vectors orthogonal to the lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generators {
    pub rays: Vec<RVec>,
    pub lines: Vec<RVec>,
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn subset_of(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    v: RVec,
    zeros: Bits,
}

/// Generators of {u : ineq·u ≤ 0, eq·u = 0}.
pub fn generators(dim: usize, ineq: &[RVec], eq: &[RVec]) -> Generators {
    let nrows = ineq.len();
    let mut lines: Vec<RVec> = (0..dim).map(|i| crate::rational::unit(dim, i)).collect();
    let mut rays: Vec<Ray> = Vec::new();

    for a in eq {
        if let Some(k) = lines.iter().position(|l| !dot(a, l).is_zero()) {
            let l = lines.swap_remove(k);
            let al = dot(a, &l);
            for l2 in lines.iter_mut() {
                eliminate(l2, a, &l, &al);
            }
            for r in rays.iter_mut() {
                eliminate(&mut r.v, a, &l, &al);
                r.v = primitive(&r.v);
            }
            continue;
        }
        let vals: Vec<Rat> = rays.iter().map(|r| dot(a, &r.v)).collect();
        rays = combine(rays, &vals, None, true);
    }

    for (k, a) in ineq.iter().enumerate() {
        if let Some(idx) = lines.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l = lines.swap_remove(idx);
            let mut al = dot(a, &l);
            if al.is_positive() {
                l = l.iter().map(|x| -x).collect();
                al = -al;
            }
            for l2 in lines.iter_mut() {
                eliminate(l2, a, &l, &al);
            }
            for r in rays.iter_mut() {
                eliminate(&mut r.v, a, &l, &al);
                r.v = primitive(&r.v);
                r.zeros.set(k);
            }
            let mut z = Bits::new(nrows);
            for j in 0..k {
                z.set(j);
            }
            rays.push(Ray { v: primitive(&l), zeros: z });
            continue;
        }
        let vals: Vec<Rat> = rays.iter().map(|r| dot(a, &r.v)).collect();
        rays = combine(rays, &vals, Some(k), false);
    }

    let (lines, _) = rref(&lines, dim);
    let lines: Vec<RVec> = lines.iter().map(|l| primitive_line(l)).collect();
    let zero_rhs = zeros(lines.len());
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for r in rays {
        let v = if lines.is_empty() { r.v } else { project_affine(&lines, &zero_rhs, &r.v).expect("consistent") };
        if is_zero_vec(&v) {
            continue;
        }
        let v = primitive(&v);
        if seen.insert(v.clone()) {
            out.push(v);
        }
    }
    out.sort();
    Generators { rays: out, lines }
}

fn eliminate(target: &mut RVec, a: &[Rat], l: &[Rat], al: &Rat) {
    let f = dot(a, target) / al;
    if f.is_zero() {
        return;
    }
    for (t, x) in target.iter_mut().zip(l) {
        *t -= &f * x;
    }
}

/// One double description step. `row` is the inequality index (None for an equality).
fn combine(rays: Vec<Ray>, vals: &[Rat], row: Option<usize>, equality: bool) -> Vec<Ray> {
    let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
    let negs: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
    let mut out = Vec::new();
    let mut seen: HashSet<RVec> = HashSet::new();
    for &p in &pos {
        for &n in &negs {
            let common = rays[p].zeros.and(&rays[n].zeros);
            let adjacent = (0..rays.len()).all(|r| r == p || r == n || !common.subset_of(&rays[r].zeros));
            if !adjacent {
                continue;
            }
            let ap = &vals[p];
            let an = -&vals[n];
            let v: RVec = rays[n].v.iter().zip(&rays[p].v).map(|(x, y)| ap * x + &an * y).collect();
            let v = primitive(&v);
            if is_zero_vec(&v) || !seen.insert(v.clone()) {
                continue;
            }
            let mut z = common;
            if let Some(k) = row {
                z.set(k);
            }
            out.push(Ray { v, zeros: z });
        }
    }
    for (i, mut r) in rays.into_iter().enumerate() {
        if vals[i].is_zero() {
            if let Some(k) = row {
                r.zeros.set(k);
            }
            out.push(r);
        } else if vals[i].is_negative() && !equality {
            out.push(r);
        }
    }
    out
}

/// A point satisfying `le` rows non-strictly, `lt` rows strictly and `eqs` exactly.
pub fn feasible_point(dim: usize, le: &[(RVec, Rat)], lt: &[(RVec, Rat)], eqs: &[(RVec, Rat)]) -> Option<RVec> {
    let hom = |(a, b): &(RVec, Rat)| {
        let mut r = a.clone();
        r.push(-b.clone());
        r
    };
    let mut ineq: Vec<RVec> = le.iter().map(hom).collect();
    let strict_start = ineq.len();
    ineq.extend(lt.iter().map(hom));
    let mut t_row = zeros(dim + 1);
    t_row[dim] = Rat::from_integer((-1).into());
    ineq.push(t_row);
    let eq: Vec<RVec> = eqs.iter().map(hom).collect();
    let g = generators(dim + 1, &ineq, &eq);
    if g.rays.is_empty() {
        return None;
    }
    let mut w = zeros(dim + 1);
    for r in &g.rays {
        for (x, y) in w.iter_mut().zip(r) {
            *x += y;
        }
    }
    for row in &ineq[strict_start..] {
        if !dot(row, &w).is_negative() {
            return None;
        }
    }
    let t = w[dim].clone();
    Some(w[..dim].iter().map(|x| x / &t).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinearMin {
    Infeasible,
    Unbounded,
    Optimal { value: Rat, point: RVec },
}

/// Minimizes `c·x` over {x : le·x ≤ b, eq·x = e}.
pub fn minimize_linear(dim: usize, c: &[Rat], le: &[(RVec, Rat)], eqs: &[(RVec, Rat)]) -> LinearMin {
    let hom = |(a, b): &(RVec, Rat)| {
        let mut r = a.clone();
        r.push(-b.clone());
        r
    };
    let mut ineq: Vec<RVec> = le.iter().map(hom).collect();
    let mut t_row = zeros(dim + 1);
    t_row[dim] = Rat::from_integer((-1).into());
    ineq.push(t_row);
    let eq: Vec<RVec> = eqs.iter().map(hom).collect();
    let g = generators(dim + 1, &ineq, &eq);
    if !g.rays.iter().any(|r| r[dim].is_positive()) {
        return LinearMin::Infeasible;
    }
    for l in &g.lines {
        if !dot(c, &l[..dim]).is_zero() {
            return LinearMin::Unbounded;
        }
    }
    let mut best: Option<(Rat, RVec)> = None;
    for r in &g.rays {
        if r[dim].is_zero() {
            if dot(c, &r[..dim]).is_negative() {
                return LinearMin::Unbounded;
            }
            continue;
        }
        let p: RVec = r[..dim].iter().map(|x| x / &r[dim]).collect();
        let v = dot(c, &p);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, p));
        }
    }
    let (value, point) = best.expect("a generator with positive homogenizing coordinate exists");
    LinearMin::Optimal { value, point }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rvec};

    #[test]
    fn quadrant_generators() {
        let g = generators(2, &[rvec(&[-1, 0]), rvec(&[0, -1])], &[]);
        assert_eq!(g.rays, vec![rvec(&[0, 1]), rvec(&[1, 0])]);
        assert!(g.lines.is_empty());
    }

    #[test]
    fn half_plane_has_a_line() {
        let g = generators(2, &[rvec(&[0, -1])], &[]);
        assert_eq!(g.rays, vec![rvec(&[0, 1])]);
        assert_eq!(g.lines, vec![rvec(&[1, 0])]);
    }

    #[test]
    fn square_pyramid_has_four_rays() {
        // x3 >= |x1|, x3 >= |x2|
        let rows = vec![rvec(&[1, 0, -1]), rvec(&[-1, 0, -1]), rvec(&[0, 1, -1]), rvec(&[0, -1, -1])];
        let g = generators(3, &rows, &[]);
        assert_eq!(g.rays.len(), 4);
        for r in &g.rays {
            assert_eq!(r[2], int(1));
        }
    }

    #[test]
    fn strict_feasibility() {
        // x > 0, x < 0 infeasible; x > 0, x <= 1 feasible
        let a = (rvec(&[1]), int(0));
        let b = (rvec(&[-1]), int(0));
        assert!(feasible_point(1, &[], &[a.clone(), b], &[]).is_none());
        let p = feasible_point(1, &[(rvec(&[1]), int(1))], &[(rvec(&[-1]), int(0))], &[]).unwrap();
        assert!(p[0] > int(0) && p[0] <= int(1));
    }

    #[test]
    fn linear_minimum_on_triangle() {
        let le = vec![(rvec(&[-1, 0]), int(0)), (rvec(&[0, -1]), int(0)), (rvec(&[1, 1]), int(1))];
        match minimize_linear(2, &rvec(&[1, 2]), &le, &[]) {
            LinearMin::Optimal { value, .. } => assert_eq!(value, int(0)),
            other => panic!("{other:?}"),
        }
        assert_eq!(minimize_linear(2, &rvec(&[-1, 0]), &le[..2], &[]), LinearMin::Unbounded);
    }
}
