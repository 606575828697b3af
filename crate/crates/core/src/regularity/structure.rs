//! Exact structural tests at the reference pair: prox-regularity and local
//! minimality of the tilted function.

use num::{Signed, Zero};

use super::RegularityError;
use crate::model::ExactFunction;
use crate::polygeom::forms::{form_sign, FormSign};
use crate::polygeom::{regular_normal_cone, PolyCone};
use crate::rational::{dot, is_zero_vec, sub, Rat};

/// Prox-regularity of f at x̄ for x̄*.
///
/// Near x̄ the domain is x̄ plus a union of cones, and every cell σ of that
/// union has normals orthogonal to itself. The prox inequality with a finite r
/// then reduces to v ∈ N̂(x̄) for all graph normals v near v̄ = x̄* − ∇g(x̄):
/// v̄ must be a regular normal at x̄, and near v̄ each cell normal cone N̂_σ
/// containing v̄ must stay inside N̂(x̄), which for polyhedral cones is the
/// inclusion of their tangent cones at v̄.
pub fn is_prox_regular(e: &ExactFunction, xbar: &[Rat], xstar: &[Rat]) -> Result<bool, RegularityError> {
    let vbar = sub(xstar, &e.smooth().gradient(xbar));
    let nu = regular_normal_cone(e.domain(), xbar)?;
    if !nu.contains(&vbar) {
        return Ok(false);
    }
    let tu = nu.tangent_at(&vbar);
    let cx = e.domain().local_complex(xbar)?;
    for cell in cx.cells() {
        if cell.normal.contains(&vbar) && !tu.contains_cone(&cell.normal.tangent_at(&vbar)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether x̄ is a local minimizer of f − ⟨x̄*, ·⟩.
///
/// On each piece containing x̄ this is the first-order condition on the tangent
/// cone plus copositivity of Q on the critical cone, which is exact for
/// quadratics over polyhedra.
pub fn is_local_minimizer(e: &ExactFunction, xbar: &[Rat], xstar: &[Rat]) -> Result<bool, RegularityError> {
    let n = e.dim();
    let s = e.smooth();
    let grad = sub(&s.gradient(xbar), xstar);
    let all: Vec<usize> = (0..n).collect();
    for p in e.domain().pieces().iter().filter(|p| p.contains(xbar)) {
        let t = p.tangent_cone(xbar)?;
        if t.rays().iter().any(|r| dot(&grad, r).is_negative()) || t.lines().iter().any(|l| !dot(&grad, l).is_zero()) {
            return Ok(false);
        }
        let mut eq = t.equalities().to_vec();
        if !is_zero_vec(&grad) {
            eq.push(grad.clone());
        }
        let crit = PolyCone::from_inequalities(n, t.inequalities().to_vec(), eq);
        if let FormSign::Negative(_) = form_sign(&crit, &s.q, &all) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadraticForm;
    use crate::polygeom::{ConvexPolyhedron, PolyUnion};
    use crate::rational::{int, rvec};

    fn axes() -> PolyUnion {
        let ax = |i: usize| {
            let mut e = rvec(&[0, 0]);
            e[i] = int(1);
            ConvexPolyhedron::from_system(2, vec![], vec![(e, int(0))])
        };
        PolyUnion::new(vec![ax(0), ax(1)]).unwrap()
    }

    #[test]
    fn cross_axes_not_prox_regular() {
        let e = ExactFunction::new(QuadraticForm::diagonal(&[int(2), int(2)]), axes()).unwrap();
        assert!(!is_prox_regular(&e, &rvec(&[0, 0]), &rvec(&[0, 0])).unwrap());
        assert!(is_local_minimizer(&e, &rvec(&[0, 0]), &rvec(&[0, 0])).unwrap());
    }

    #[test]
    fn convex_and_saddle() {
        let w = ConvexPolyhedron::new(vec![rvec(&[-1, 1]), rvec(&[-1, -1])], vec![int(0), int(0)], 2).unwrap();
        let e = ExactFunction::new(QuadraticForm::diagonal(&[int(2), int(-2)]), PolyUnion::new(vec![w]).unwrap()).unwrap();
        assert!(is_prox_regular(&e, &rvec(&[0, 0]), &rvec(&[0, 0])).unwrap());
        assert!(is_local_minimizer(&e, &rvec(&[0, 0]), &rvec(&[0, 0])).unwrap());
        let s = ExactFunction::unconstrained(QuadraticForm::diagonal(&[int(1), int(-1)]));
        assert!(!is_local_minimizer(&s, &rvec(&[0, 0]), &rvec(&[0, 0])).unwrap());
    }
}
