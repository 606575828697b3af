//! Second-order objects: normal cones to the graph of ∂f, the generalized
//! Hessian u ↦ ∂²f(x̄,x̄*)(u), its regular counterpart, kernel and definiteness.
//!
//! Convention: `(w, z)` in the graph normal cone means `w ∈ ∂²f(x̄,x̄*)(−z)`.

use num::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{ExactFunction, FunctionSpec, ModelError, QuadraticForm};
use crate::polygeom::forms::{form_sign, FormSign};
use crate::polygeom::{self, ConeUnion, ConvexPolyhedron, GeomError, PolyCone, PolyUnion};
use crate::rational::{dot, fmt_rat, int, is_zero_vec, mat_vec, neg, primitive, sub, unit, zeros, RVec, Rat};

#[derive(Debug, Error)]
pub enum HessianError {
    #[error("xstar is not a subgradient at x")]
    NotSubgradient,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Convex pieces in R²ⁿ whose union is gph ∂f near the basepoint.
#[derive(Clone, Debug)]
pub struct GraphLocalModel {
    pub n: usize,
    pub basepoint: RVec,
    pub pieces: Vec<ConvexPolyhedron>,
}

impl GraphLocalModel {
    pub fn union(&self) -> PolyUnion {
        PolyUnion::new(self.pieces.clone()).expect("graph pieces contain the basepoint")
    }

    pub fn contains(&self, x: &[Rat], v: &[Rat]) -> bool {
        let mut p = x.to_vec();
        p.extend(v.iter().cloned());
        self.pieces.iter().any(|q| q.contains(&p))
    }
}

pub fn build_graph_model(f: &FunctionSpec, xbar: &[Rat], xstar: &[Rat]) -> Result<GraphLocalModel, HessianError> {
    graph_model(f.as_exact()?, xbar, xstar)
}

pub fn graph_model(e: &ExactFunction, xbar: &[Rat], xstar: &[Rat]) -> Result<GraphLocalModel, HessianError> {
    let n = e.dim();
    if !crate::subdiff::exact_contains(e, xbar, xstar) {
        return Err(HessianError::NotSubgradient);
    }
    let s = e.smooth();
    let vbar = sub(xstar, &s.gradient(xbar));
    let cx = e.domain().local_complex(xbar)?;
    let mut pieces = Vec::new();
    for cell in cx.cells() {
        if !cell.normal.contains(&vbar) {
            continue;
        }
        let mut le = Vec::new();
        let mut eq = Vec::new();
        // x − x̄ in the closed cell
        for (row, rhs) in cell.closure.row_pairs() {
            debug_assert!(rhs.is_zero());
            let mut r = row.clone();
            r.extend(zeros(n));
            le.push((r, dot(&row, xbar)));
        }
        // y − Qx − c in the cell's normal cone
        let lift = |g: &RVec| -> (RVec, Rat) {
            let mut r: RVec = (0..n).map(|j| -(0..n).map(|i| &g[i] * &s.q[i][j]).sum::<Rat>()).collect();
            r.extend(g.iter().cloned());
            (r, dot(g, &s.c))
        };
        le.extend(cell.normal.inequalities().iter().map(lift));
        eq.extend(cell.normal.equalities().iter().map(lift));
        pieces.push(ConvexPolyhedron::from_system(2 * n, le, eq));
    }
    let mut basepoint = xbar.to_vec();
    basepoint.extend(xstar.iter().cloned());
    Ok(GraphLocalModel { n, basepoint, pieces })
}

pub fn graph_normal_cone_limiting(model: &GraphLocalModel) -> Result<ConeUnion, HessianError> {
    Ok(polygeom::limiting_normal_cone(&model.union(), &model.basepoint)?)
}

pub fn graph_normal_cone_regular(model: &GraphLocalModel) -> Result<PolyCone, HessianError> {
    Ok(polygeom::regular_normal_cone(&model.union(), &model.basepoint)?)
}

/// u ↦ {w : (w, −u) ∈ N_gph}.
#[derive(Clone, Debug)]
pub struct HessianMap {
    pub n: usize,
    pub normal_cone: ConeUnion,
}

impl HessianMap {
    pub fn new(f: &FunctionSpec, xbar: &[Rat], xstar: &[Rat]) -> Result<Self, HessianError> {
        let model = build_graph_model(f, xbar, xstar)?;
        Ok(HessianMap { n: model.n, normal_cone: graph_normal_cone_limiting(&model)? })
    }

    /// ∂²f(x̄,x̄*)(u) as a union of polyhedra in w-space (empty list = empty set).
    pub fn query(&self, u: &[Rat]) -> Vec<ConvexPolyhedron> {
        self.normal_cone.pieces().iter().filter_map(|k| cone_slice(k, self.n, u)).collect()
    }

    pub fn contains(&self, u: &[Rat], w: &[Rat]) -> bool {
        let p = pair(w, &neg(u));
        self.normal_cone.contains(&p)
    }
}

fn pair(w: &[Rat], z: &[Rat]) -> RVec {
    let mut p = w.to_vec();
    p.extend(z.iter().cloned());
    p
}

/// {w : (w, −u) ∈ K}, or `None` when empty.
fn cone_slice(k: &PolyCone, n: usize, u: &[Rat]) -> Option<ConvexPolyhedron> {
    let split = |g: &RVec| -> (RVec, Rat) { (g[..n].to_vec(), dot(&g[n..], u)) };
    let le: Vec<(RVec, Rat)> = k.inequalities().iter().map(split).collect();
    let eq: Vec<(RVec, Rat)> = k.equalities().iter().map(split).collect();
    let p = ConvexPolyhedron::from_system(n, le, eq);
    (!p.faces().is_empty()).then_some(p)
}

pub fn second_order_subdifferential(f: &FunctionSpec, xbar: &[Rat], xstar: &[Rat], u: &[Rat]) -> Result<Vec<ConvexPolyhedron>, HessianError> {
    Ok(HessianMap::new(f, xbar, xstar)?.query(u))
}

/// {w : (w, −u) ∈ N̂_gph}; `None` when empty.
pub fn combined_second_order(f: &FunctionSpec, x: &[Rat], xstar: &[Rat], u: &[Rat]) -> Result<Option<ConvexPolyhedron>, HessianError> {
    let model = build_graph_model(f, x, xstar)?;
    let k = graph_normal_cone_regular(&model)?;
    Ok(cone_slice(&k, model.n, u))
}

/// Directions used to compare Hessian slices: signed unit vectors, their
/// pairwise sums and the directions carried by the graph normal cone.
pub fn probe_directions(map: &HessianMap) -> Vec<RVec> {
    let n = map.n;
    let mut dirs: Vec<RVec> = Vec::new();
    let mut push = |v: RVec| {
        if !is_zero_vec(&v) {
            let p = primitive(&v);
            if !dirs.contains(&p) {
                dirs.push(p);
            }
        }
    };
    for i in 0..n {
        push(unit(n, i));
        push(neg(&unit(n, i)));
        for j in i + 1..n {
            for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut v = zeros(n);
                v[i] = int(si);
                v[j] = int(sj);
                push(v);
            }
        }
    }
    for k in map.normal_cone.pieces() {
        for g in k.spanning_vectors() {
            push(neg(&g[n..]));
        }
    }
    dirs
}

/// Compares ∂²f(x̄,x̄*)(u) with Qu + ∂²δ(x̄, x̄* − ∇g(x̄))(u) for every probe direction.
pub fn hessian_sum_rule_check(f: &FunctionSpec, xbar: &[Rat], xstar: &[Rat]) -> Result<bool, HessianError> {
    let e = f.as_exact()?;
    let n = e.dim();
    let direct = HessianMap::new(f, xbar, xstar)?;
    let indicator = FunctionSpec::Exact(ExactFunction::new(QuadraticForm::diagonal(&zeros(n)), e.domain().clone())?);
    let vbar = sub(xstar, &e.smooth().gradient(xbar));
    let ind = HessianMap::new(&indicator, xbar, &vbar)?;
    for u in probe_directions(&direct).into_iter().chain(probe_directions(&ind)) {
        let lhs = direct.query(&u);
        let qu = mat_vec(&e.smooth().q, &u);
        let rhs: Vec<ConvexPolyhedron> = ind.query(&u).iter().map(|p| p.translate(&qu)).collect();
        if !polygeom::unions_equal(&lhs, &rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelVerdict {
    Trivial,
    /// Generators of the cones of nonzero u with 0 ∈ ∂²f(x̄,x̄*)(u).
    Nontrivial { generators: Vec<Vec<String>> },
}

impl KernelVerdict {
    pub fn is_trivial(&self) -> bool {
        matches!(self, KernelVerdict::Trivial)
    }
}

pub fn kernel(f: &FunctionSpec, xbar: &[Rat], xstar: &[Rat]) -> Result<KernelVerdict, HessianError> {
    let map = HessianMap::new(f, xbar, xstar)?;
    Ok(kernel_of(&map))
}

pub fn kernel_of(map: &HessianMap) -> KernelVerdict {
    let gens = kernel_generators(map);
    if gens.is_empty() {
        KernelVerdict::Trivial
    } else {
        KernelVerdict::Nontrivial { generators: gens.iter().map(|g| g.iter().map(fmt_rat).collect()).collect() }
    }
}

/// Rational generators u of {u : (0, −u) ∈ N_gph}.
pub fn kernel_generators(map: &HessianMap) -> Vec<RVec> {
    let n = map.n;
    // z ↦ (0, z)
    let embed: Vec<RVec> = (0..2 * n).map(|i| (0..n).map(|j| if i == n + j { int(1) } else { Rat::zero() }).collect()).collect();
    let mut out: Vec<RVec> = Vec::new();
    for k in map.normal_cone.pieces() {
        let k0 = k.preimage(&embed, n);
        for g in k0.spanning_vectors() {
            let u = primitive(&neg(&g));
            if !out.contains(&u) {
                out.push(u);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefiniteDegenerate,
    Indefinite,
}

/// u* ∈ ∂²f(x̄,x̄*)(u) with the exact inner product ⟨u*,u⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub u: RVec,
    pub ustar: RVec,
    pub inner: Rat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefinitenessVerdict {
    pub verdict: Definiteness,
    pub witness: Option<Witness>,
    pub kernel: KernelVerdict,
    /// Some w ≠ 0 lies in ∂²f(x̄,x̄*)(0).
    pub vertical_pieces: bool,
}

/// Symmetric matrix of (w, z) ↦ −⟨w, z⟩ + r‖z‖² + s‖w‖² on R²ⁿ.
pub fn pair_form(n: usize, r: &Rat, s: &Rat) -> Vec<RVec> {
    let half = Rat::new(1.into(), 2.into());
    (0..2 * n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    if i == j {
                        if i < n {
                            s.clone()
                        } else {
                            r.clone()
                        }
                    } else if (i + n == j) || (j + n == i) {
                        -half.clone()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn definiteness(f: &FunctionSpec, xbar: &[Rat], xstar: &[Rat]) -> Result<DefinitenessVerdict, HessianError> {
    let map = HessianMap::new(f, xbar, xstar)?;
    Ok(definiteness_of(&map))
}

pub fn definiteness_of(map: &HessianMap) -> DefinitenessVerdict {
    let n = map.n;
    let s = pair_form(n, &Rat::zero(), &Rat::zero());
    let z_coords: Vec<usize> = (n..2 * n).collect();
    let kernel = kernel_of(map);
    let vertical_pieces = map.normal_cone.pieces().iter().any(|k| k.spanning_vectors().iter().any(|g| is_zero_vec(&g[n..]) && !is_zero_vec(&g[..n])));
    let mut zero: Option<Witness> = None;
    for k in map.normal_cone.pieces() {
        match form_sign(k, &s, &z_coords) {
            FormSign::Negative(v) => {
                return DefinitenessVerdict { verdict: Definiteness::Indefinite, witness: Some(witness_of(&v, n)), kernel, vertical_pieces };
            }
            FormSign::Zero(v) => {
                if zero.is_none() {
                    zero = Some(witness_of(&v, n));
                }
            }
            FormSign::Positive => {}
        }
    }
    match zero {
        Some(w) => DefinitenessVerdict { verdict: Definiteness::PositiveSemidefiniteDegenerate, witness: Some(w), kernel, vertical_pieces },
        None => DefinitenessVerdict { verdict: Definiteness::PositiveDefinite, witness: None, kernel, vertical_pieces },
    }
}

/// Witness from a cone vector (w, z), scaled so the largest |u_i| is 1.
fn witness_of(v: &[Rat], n: usize) -> Witness {
    let u = neg(&v[n..]);
    let m = u.iter().map(|x| x.abs()).max().expect("n ≥ 1");
    let scale = if m.is_positive() { m.recip() } else { Rat::from_integer(1.into()) };
    let u: RVec = u.iter().map(|x| x * &scale).collect();
    let ustar: RVec = v[..n].iter().map(|x| x * &scale).collect();
    let inner = dot(&ustar, &u);
    Witness { u, ustar, inner }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExactFunction, QuadraticForm};
    use crate::rational::{frac, rvec};

    fn wedge_fn() -> FunctionSpec {
        let q = QuadraticForm::diagonal(&[int(2), int(-2)]);
        let w = ConvexPolyhedron::new(vec![rvec(&[-1, 1]), rvec(&[-1, -1])], vec![int(0), int(0)], 2).unwrap();
        FunctionSpec::Exact(ExactFunction::new(q, PolyUnion::new(vec![w]).unwrap()).unwrap())
    }

    fn half_line(q: i64) -> FunctionSpec {
        let p = ConvexPolyhedron::new(vec![rvec(&[-1])], vec![int(0)], 1).unwrap();
        FunctionSpec::Exact(ExactFunction::new(QuadraticForm::diagonal(&[int(q)]), PolyUnion::new(vec![p]).unwrap()).unwrap())
    }

    #[test]
    fn wedge_graph_has_four_pieces() {
        let m = build_graph_model(&wedge_fn(), &rvec(&[0, 0]), &rvec(&[0, 0])).unwrap();
        assert_eq!(m.pieces.len(), 4);
    }

    #[test]
    fn wedge_hessian_contains_negative_pair() {
        let map = HessianMap::new(&wedge_fn(), &rvec(&[0, 0]), &rvec(&[0, 0])).unwrap();
        assert!(map.contains(&rvec(&[0, 1]), &rvec(&[0, -2])));
        let d = definiteness_of(&map);
        assert_eq!(d.verdict, Definiteness::Indefinite);
        assert!(d.witness.unwrap().inner.is_negative());
        assert!(!kernel_of(&map).is_trivial());
    }

    #[test]
    fn complementarity_graph() {
        let f = half_line(0);
        let m = build_graph_model(&f, &rvec(&[0]), &rvec(&[0])).unwrap();
        assert_eq!(m.pieces.len(), 2);
        let n = graph_normal_cone_limiting(&m).unwrap();
        for v in [rvec(&[0, 1]), rvec(&[1, 0]), rvec(&[-1, 1]), rvec(&[0, -1]), rvec(&[-1, 0])] {
            assert!(n.contains(&v), "{v:?}");
        }
        assert!(!n.contains(&rvec(&[1, -1])));
        let c = combined_second_order(&f, &rvec(&[0]), &rvec(&[0]), &rvec(&[1])).unwrap();
        assert!(c.is_none());
    }

    #[test]
    fn half_square_on_half_line() {
        let f = half_line(1);
        let d = definiteness(&f, &rvec(&[0]), &rvec(&[0])).unwrap();
        assert_eq!(d.verdict, Definiteness::PositiveDefinite);
        assert!(d.kernel.is_trivial());
        assert!(d.vertical_pieces);
        assert!(hessian_sum_rule_check(&f, &rvec(&[0]), &rvec(&[0])).unwrap());
    }

    #[test]
    fn smooth_quadratic_slice() {
        let f = FunctionSpec::Exact(ExactFunction::unconstrained(QuadraticForm::diagonal(&[int(1), int(2)])));
        let s = second_order_subdifferential(&f, &rvec(&[1, 1]), &rvec(&[1, 2]), &rvec(&[1, 1])).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].contains(&rvec(&[1, 2])) && !s[0].contains(&[int(1), frac(5, 2)]));
        assert_eq!(s[0].affine_dim(), Some(0));
    }

    #[test]
    fn wedge_sum_rule() {
        assert!(hessian_sum_rule_check(&wedge_fn(), &rvec(&[0, 0]), &rvec(&[0, 0])).unwrap());
    }
}
