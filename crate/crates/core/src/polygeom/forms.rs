//! Sign of a quadratic form restricted to a polyhedral cone (copositivity).
//!
//! The minimum of `vᵀSv` over `C ∩ sphere` sits in the relative interior of
//! some face, where it is a critical point of the form restricted to the
//! face's span. Candidates found in floating point are rationalized and
//! re-checked exactly; zero sets are computed exactly from rational null spaces.

use nalgebra::{DMatrix, SymmetricEigen};
use num::{Signed, Zero};

use super::polyhedron::orthonormalize;
use super::PolyCone;
use crate::rational::{approx_f64, dot, is_zero_vec, mat_vec, null_space, primitive, project_affine, rref, to_f64, vec_f64, zeros, RVec, Rat};

#[derive(Clone, Debug, PartialEq)]
pub enum FormSign {
    /// A cone vector with negative form value.
    Negative(RVec),
    /// Form is nonnegative on the cone and vanishes at this relevant vector.
    Zero(RVec),
    /// Form is strictly positive at every relevant nonzero cone vector.
    Positive,
}

pub fn quad(s: &[RVec], v: &[Rat]) -> Rat {
    dot(v, &mat_vec(s, v))
}

/// `relevant` lists coordinates of which at least one must be nonzero for a
/// vector to count; vectors vanishing on all of them are ignored.
pub fn form_sign(cone: &PolyCone, s: &[RVec], relevant: &[usize]) -> FormSign {
    let is_relevant = |v: &[Rat]| relevant.iter().any(|&i| !v[i].is_zero());
    let gens = cone.spanning_vectors();
    for g in &gens {
        if quad(s, g).is_negative() {
            return FormSign::Negative(g.clone());
        }
    }
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let v: RVec = gens[i].iter().zip(&gens[j]).map(|(a, b)| a + b).collect();
            if quad(s, &v).is_negative() {
                return FormSign::Negative(primitive(&v));
            }
        }
    }
    let faces = cone.faces();
    for f in &faces {
        if let Some(w) = negative_in_face(f, s) {
            return FormSign::Negative(w);
        }
    }
    for f in &faces {
        if let Some(w) = zero_in_face(f, s, &is_relevant) {
            return FormSign::Zero(w);
        }
    }
    FormSign::Positive
}

/// Smallest form value over unit vectors of the cone, in floating point,
/// taken over face-restricted critical points.
pub fn form_min_f64(cone: &PolyCone, s: &[RVec]) -> f64 {
    let mut best = f64::INFINITY;
    if cone.is_zero() {
        return best;
    }
    let sf: Vec<Vec<f64>> = s.iter().map(|r| vec_f64(r)).collect();
    for f in cone.faces() {
        for (lam, v) in restricted_eigen(&f, &sf) {
            if inside_f64(&f, &v) {
                best = best.min(lam);
            }
        }
    }
    best
}

fn span_basis(f: &PolyCone) -> Vec<RVec> {
    let mut v = f.rays().to_vec();
    v.extend(f.lines().iter().cloned());
    let n = f.dim();
    // independent subset
    let mut basis: Vec<RVec> = Vec::new();
    for g in v {
        let mut trial = basis.clone();
        trial.push(g.clone());
        if rref(&trial, n).1.len() == trial.len() {
            basis.push(g);
        }
    }
    basis
}

fn restricted_eigen(f: &PolyCone, sf: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let basis = orthonormalize(span_basis(f).iter().map(|v| vec_f64(v)).collect());
    let k = basis.len();
    if k == 0 {
        return vec![];
    }
    let n = f.dim();
    let m = DMatrix::from_fn(k, k, |i, j| {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += basis[i][a] * sf[a][b] * basis[j][b];
            }
        }
        acc
    });
    let eig = SymmetricEigen::new(m);
    let mut out = Vec::new();
    for idx in 0..k {
        let c = eig.eigenvectors.column(idx);
        let mut v = vec![0.0; n];
        for (i, q) in basis.iter().enumerate() {
            for a in 0..n {
                v[a] += c[i] * q[a];
            }
        }
        out.push((eig.eigenvalues[idx], v.clone()));
        out.push((eig.eigenvalues[idx], v.iter().map(|x| -x).collect()));
    }
    out
}

fn inside_f64(f: &PolyCone, v: &[f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    f.inequalities().iter().all(|g| {
        let s: f64 = g.iter().zip(v).map(|(a, b)| to_f64(a) * b).sum();
        let gn = g.iter().map(|a| to_f64(a).powi(2)).sum::<f64>().sqrt();
        s <= 1e-9 * gn * norm
    })
}

fn negative_in_face(f: &PolyCone, s: &[RVec]) -> Option<RVec> {
    let sf: Vec<Vec<f64>> = s.iter().map(|r| vec_f64(r)).collect();
    let n = f.dim();
    let span = span_basis(f);
    let comp = null_space(&span, n);
    for (lam, v) in restricted_eigen(f, &sf) {
        if lam >= 0.0 || !inside_f64(f, &v) {
            continue;
        }
        for den in [1_000_i64, 1_000_000, 1_000_000_000_000] {
            let approx: RVec = v.iter().map(|x| approx_f64(*x, den)).collect();
            let Some(w) = project_affine(&comp, &zeros(comp.len()), &approx) else {
                continue;
            };
            if !is_zero_vec(&w) && f.contains(&w) && quad(s, &w).is_negative() {
                return Some(primitive(&w));
            }
        }
    }
    None
}

fn zero_in_face(f: &PolyCone, s: &[RVec], relevant: &dyn Fn(&[Rat]) -> bool) -> Option<RVec> {
    let n = f.dim();
    let basis = span_basis(f);
    let k = basis.len();
    if k == 0 {
        return None;
    }
    let sb: Vec<RVec> = basis.iter().map(|b| mat_vec(s, b)).collect();
    let m: Vec<RVec> = (0..k).map(|i| (0..k).map(|j| dot(&basis[i], &sb[j])).collect()).collect();
    let ker = null_space(&m, k);
    if ker.is_empty() {
        return None;
    }
    let w: Vec<RVec> = ker
        .iter()
        .map(|c| {
            let mut v = zeros(n);
            for (ci, b) in c.iter().zip(&basis) {
                for a in 0..n {
                    v[a] += ci * &b[a];
                }
            }
            v
        })
        .collect();
    let comp = null_space(&w, n);
    let mut eq = f.equalities().to_vec();
    eq.extend(comp);
    let z = PolyCone::from_inequalities(n, f.inequalities().to_vec(), eq);
    z.spanning_vectors().into_iter().find(|g| relevant(g) && quad(s, g).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rvec;

    fn mat(rows: &[&[i64]]) -> Vec<RVec> {
        rows.iter().map(|r| rvec(r)).collect()
    }

    #[test]
    fn copositive_not_psd() {
        // x·y on the nonnegative quadrant is copositive with zeros on the axes
        let s = mat(&[&[0, 1], &[1, 0]]);
        let quadrant = PolyCone::from_generators(2, vec![rvec(&[1, 0]), rvec(&[0, 1])], vec![]);
        assert!(matches!(form_sign(&quadrant, &s, &[0, 1]), FormSign::Zero(_)));
        let full = PolyCone::full(2);
        assert!(matches!(form_sign(&full, &s, &[0, 1]), FormSign::Negative(_)));
    }

    #[test]
    fn definite_on_subspace() {
        let s = mat(&[&[1, 0], &[0, -1]]);
        let line = PolyCone::from_generators(2, vec![], vec![rvec(&[2, 1])]);
        assert_eq!(form_sign(&line, &s, &[0, 1]), FormSign::Positive);
        assert!((form_min_f64(&line, &s) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn negative_found_inside_face() {
        // q = x² + y² - 3xy is negative near the diagonal, positive on the axes
        let s: Vec<RVec> = vec![vec![Rat::from_integer(2.into()), Rat::from_integer((-3).into())], vec![Rat::from_integer((-3).into()), Rat::from_integer(2.into())]];
        let quadrant = PolyCone::from_generators(2, vec![rvec(&[1, 0]), rvec(&[0, 1])], vec![]);
        match form_sign(&quadrant, &s, &[0, 1]) {
            FormSign::Negative(w) => assert!(quad(&s, &w).is_negative()),
            other => panic!("{other:?}"),
        }
    }
}
