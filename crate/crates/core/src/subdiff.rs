//! First-order objects: limiting and Fréchet subdifferentials, distances to
//! them, and slices of the inverse map.

use thiserror::Error;

use crate::model::{AnalyticFixture1D, ExactFunction, FunctionSpec, ModelError};
use crate::polygeom::{self, ConeUnion, ConvexPolyhedron, GeomError, PolyCone};
use crate::rational::{sub, to_f64, vec_f64, RVec, Rat};

#[derive(Debug, Error)]
pub enum SubdiffError {
    #[error("point is outside the domain")]
    OutsideDomain,
    #[error("inverse image is empty inside the box")]
    EmptySlice,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Value of ∂f(x).
#[derive(Clone, Debug)]
pub enum SubdifferentialSet {
    /// `base + ∪ cones`.
    Exact { base: RVec, cones: ConeUnion },
    /// Enclosure of a one-dimensional subdifferential, accurate to `tol`.
    Interval1D { lo: f64, hi: f64, lo_closed: bool, hi_closed: bool, tol: f64 },
}

impl SubdifferentialSet {
    pub fn contains(&self, v: &[Rat]) -> bool {
        match self {
            SubdifferentialSet::Exact { base, cones } => cones.contains(&sub(v, base)),
            SubdifferentialSet::Interval1D { .. } => self.contains_f64(&vec_f64(v), 1e-9),
        }
    }

    pub fn contains_f64(&self, v: &[f64], tol: f64) -> bool {
        self.distance(v) <= tol
    }

    pub fn distance(&self, v: &[f64]) -> f64 {
        match self {
            SubdifferentialSet::Exact { base, cones } => {
                let d: Vec<f64> = v.iter().zip(base).map(|(a, b)| a - to_f64(b)).collect();
                cones.distance_f64(&d)
            }
            SubdifferentialSet::Interval1D { lo, hi, .. } => {
                let x = v[0];
                if x < *lo {
                    lo - x
                } else if x > *hi {
                    x - hi
                } else {
                    0.0
                }
            }
        }
    }
}

/// Cones of ∂f(x) − ∇g(x) read off the cached global cell complex.
pub fn subgradient_cones(e: &ExactFunction, x: &[Rat]) -> Vec<PolyCone> {
    e.complex().adherent(x).map(|c| c.normal.clone()).collect()
}

pub fn subdifferential(f: &FunctionSpec, x: &[Rat]) -> Result<SubdifferentialSet, SubdiffError> {
    match f {
        FunctionSpec::Exact(e) => {
            if !e.domain().contains(x) {
                return Err(SubdiffError::OutsideDomain);
            }
            let cones = polygeom::limiting_normal_cone(e.domain(), x)?;
            Ok(SubdifferentialSet::Exact { base: e.smooth().gradient(x), cones })
        }
        FunctionSpec::Analytic(a) => Ok(analytic_subdifferential(a, to_f64(&x[0]))?),
    }
}

pub fn frechet_subdifferential(f: &FunctionSpec, x: &[Rat]) -> Result<SubdifferentialSet, SubdiffError> {
    match f {
        FunctionSpec::Exact(e) => {
            if !e.domain().contains(x) {
                return Err(SubdiffError::OutsideDomain);
            }
            let cone = polygeom::regular_normal_cone(e.domain(), x)?;
            Ok(SubdifferentialSet::Exact { base: e.smooth().gradient(x), cones: ConeUnion::new(e.dim(), vec![cone]) })
        }
        FunctionSpec::Analytic(a) => analytic_frechet(a, to_f64(&x[0])),
    }
}

const LIMIT_SAMPLES: usize = 10_000;

/// Geometric offsets from 1e-4 down to 1e-12.
fn offsets() -> impl Iterator<Item = f64> {
    (0..LIMIT_SAMPLES).map(|k| 10f64.powf(-4.0 - 8.0 * k as f64 / (LIMIT_SAMPLES - 1) as f64))
}

fn analytic_subdifferential(a: &AnalyticFixture1D, x: f64) -> Result<SubdifferentialSet, SubdiffError> {
    if !a.domain.contains(x) {
        return Err(SubdiffError::OutsideDomain);
    }
    if !a.exceptional.contains(&x) {
        let d = (a.derivative)(x);
        return Ok(SubdifferentialSet::Interval1D { lo: d, hi: d, lo_closed: true, hi_closed: true, tol: 0.0 });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for h in offsets() {
        for y in [x - h, x + h] {
            if a.domain.contains(y) && y != x {
                let d = (a.derivative)(y);
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
    }
    if let SubdifferentialSet::Interval1D { lo: flo, hi: fhi, .. } = analytic_frechet(a, x)? {
        lo = lo.min(flo);
        hi = hi.max(fhi);
    }
    Ok(SubdifferentialSet::Interval1D { lo, hi, lo_closed: lo.is_finite(), hi_closed: hi.is_finite(), tol: 1e-3 })
}

/// Fréchet subgradients at `x` from one-sided difference quotients.
fn analytic_frechet(a: &AnalyticFixture1D, x: f64) -> Result<SubdifferentialSet, SubdiffError> {
    if !a.domain.contains(x) {
        return Err(SubdiffError::OutsideDomain);
    }
    if !a.exceptional.contains(&x) {
        let d = (a.derivative)(x);
        return Ok(SubdifferentialSet::Interval1D { lo: d, hi: d, lo_closed: true, hi_closed: true, tol: 0.0 });
    }
    let fx = (a.value)(x);
    // v ≤ liminf of right quotients, v ≥ limsup of left quotients
    let mut hi = f64::INFINITY;
    let mut lo = f64::NEG_INFINITY;
    for h in offsets() {
        if a.domain.contains(x + h) {
            hi = hi.min(((a.value)(x + h) - fx) / h);
        }
        if a.domain.contains(x - h) {
            lo = lo.max((fx - (a.value)(x - h)) / h);
        }
    }
    Ok(SubdifferentialSet::Interval1D { lo, hi, lo_closed: lo.is_finite(), hi_closed: hi.is_finite(), tol: 1e-3 })
}

/// d(v; ∂f(x)).
pub fn subdifferential_distance(f: &FunctionSpec, x: &[Rat], v: &[f64]) -> Result<f64, SubdiffError> {
    match f {
        FunctionSpec::Exact(e) => exact_distance(e, x, v),
        FunctionSpec::Analytic(_) => Ok(subdifferential(f, x)?.distance(v)),
    }
}

/// Same as [`subdifferential_distance`] through the global complex; suited to grid loops.
pub fn exact_distance(e: &ExactFunction, x: &[Rat], v: &[f64]) -> Result<f64, SubdiffError> {
    let cones = subgradient_cones(e, x);
    if cones.is_empty() {
        return Err(SubdiffError::OutsideDomain);
    }
    let g = vec_f64(&e.smooth().gradient(x));
    let d: Vec<f64> = v.iter().zip(&g).map(|(a, b)| a - b).collect();
    Ok(cones.iter().map(|c| c.distance_f64(&d)).fold(f64::INFINITY, f64::min))
}

/// Exact test of v ∈ ∂f(x) through the global complex.
pub fn exact_contains(e: &ExactFunction, x: &[Rat], v: &[Rat]) -> bool {
    let w = sub(v, &e.smooth().gradient(x));
    e.complex().adherent(x).any(|c| c.normal.contains(&w))
}

/// (∂f)⁻¹(v) ∩ box as a list of convex pieces.
#[derive(Clone, Debug)]
pub struct InverseSlice {
    pub pieces: Vec<ConvexPolyhedron>,
    pub bbox: ConvexPolyhedron,
    /// Some piece reaches the box boundary, so the full inverse image may extend past the box.
    pub touches_box: bool,
}

impl InverseSlice {
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64, SubdiffError> {
        let mut best = f64::INFINITY;
        for p in &self.pieces {
            best = best.min(p.distance(x)?);
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(SubdiffError::EmptySlice)
        }
    }
}

pub fn inverse_image(f: &FunctionSpec, v: &[Rat], bbox: &ConvexPolyhedron) -> Result<InverseSlice, SubdiffError> {
    let e = f.as_exact()?;
    Ok(exact_inverse_image(e, v, bbox))
}

pub fn exact_inverse_image(e: &ExactFunction, v: &[Rat], bbox: &ConvexPolyhedron) -> InverseSlice {
    let n = e.dim();
    let s = e.smooth();
    let shift = sub(v, &s.c);
    let cx = e.complex();
    let mut pieces = Vec::new();
    let mut touches_box = false;
    for cell in cx.cells() {
        // v − Qx − c ∈ N:  G(v − c) − GQx ≤ 0,  E(v − c) − EQx = 0
        let map = |g: &RVec| -> (RVec, Rat) {
            let row: RVec = (0..n).map(|j| -(0..n).map(|i| &g[i] * &s.q[i][j]).sum::<Rat>()).collect();
            let rhs = -crate::rational::dot(g, &shift);
            (row, rhs)
        };
        let le: Vec<(RVec, Rat)> = cell.normal.inequalities().iter().map(map).collect();
        let eq: Vec<(RVec, Rat)> = cell.normal.equalities().iter().map(map).collect();
        let base = cell.closure.intersect(bbox);
        let box_rows: Vec<usize> = (cell.closure.rows()..base.rows()).collect();
        let p = base.with_rows(le, eq);
        let faces = p.faces();
        if faces.is_empty() {
            continue;
        }
        if faces.iter().any(|f| f.active.iter().any(|i| box_rows.contains(i))) {
            touches_box = true;
        }
        pieces.push(p);
    }
    InverseSlice { pieces, bbox: bbox.clone(), touches_box }
}

pub fn distance_to_inverse(f: &FunctionSpec, v: &[Rat], x: &[f64], bbox: &ConvexPolyhedron) -> Result<f64, SubdiffError> {
    inverse_image(f, v, bbox)?.distance(x)
}

/// Roots of f′ in `(a, b)` by sign-change bracketing on a uniform grid and bisection.
pub fn stationary_points_1d(fx: &AnalyticFixture1D, interval: (f64, f64), density: usize) -> Vec<f64> {
    roots_1d(fx.derivative, interval, density)
}

/// Roots of `d` in `(a, b)`, same bracketing as [`stationary_points_1d`].
pub fn roots_1d(d: impl Fn(f64) -> f64, interval: (f64, f64), density: usize) -> Vec<f64> {
    let (a, b) = interval;
    let n = density.max(1);
    let h = (b - a) / n as f64;
    let mut roots = Vec::new();
    let mut prev_x = a;
    let mut prev = d(a);
    for k in 1..=n {
        let x = if k == n { b } else { a + h * k as f64 };
        let y = d(x);
        if prev == 0.0 {
            roots.push(prev_x);
        } else if prev.signum() != y.signum() && y != 0.0 {
            let (mut lo, mut hi) = (prev_x, x);
            let slo = prev.signum();
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let m = d(mid);
                if m == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if m.signum() == slo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_x = x;
        prev = y;
    }
    roots.retain(|r| *r > a && *r < b);
    roots
}

/// Vectors in `∂f(x)` for every generator direction of the cones, translated by the base.
pub fn sample_members(set: &SubdifferentialSet) -> Vec<RVec> {
    match set {
        SubdifferentialSet::Exact { base, cones } => {
            let mut out = vec![base.clone()];
            for c in cones.pieces() {
                for g in c.spanning_vectors() {
                    out.push(base.iter().zip(&g).map(|(a, b)| a + b).collect());
                }
            }
            out
        }
        SubdifferentialSet::Interval1D { .. } => vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{analytic_fixture, ExactFunction, QuadraticForm};
    use crate::polygeom::PolyUnion;
    use crate::rational::{frac, int, rvec};

    fn wedge_fn() -> FunctionSpec {
        let q = QuadraticForm::diagonal(&[int(2), int(-2)]);
        let w = ConvexPolyhedron::new(vec![rvec(&[-1, 1]), rvec(&[-1, -1])], vec![int(0), int(0)], 2).unwrap();
        FunctionSpec::Exact(ExactFunction::new(q, PolyUnion::new(vec![w]).unwrap()).unwrap())
    }

    #[test]
    fn wedge_subdifferential_at_vertex() {
        let s = subdifferential(&wedge_fn(), &rvec(&[0, 0])).unwrap();
        assert!(s.contains(&rvec(&[-1, 1])) && s.contains(&rvec(&[-3, 1])));
        assert!(!s.contains(&rvec(&[0, 5])));
        let d = subdifferential_distance(&wedge_fn(), &rvec(&[0, 0]), &[1.0, 0.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wedge_inverse_image_is_two_segments() {
        let bx = ConvexPolyhedron::cube(&rvec(&[0, 0]), &int(1));
        let s = inverse_image(&wedge_fn(), &rvec(&[0, 0]), &bx).unwrap();
        assert!(s.contains(&rvec(&[1, 1])) && s.contains(&rvec(&[1, -1])) && s.contains(&[frac(1, 2), frac(1, 2)]));
        assert!(!s.contains(&rvec(&[1, 0])));
        let d = s.distance(&[1.0, 0.0]).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sin_inv_enclosure_at_zero() {
        let f = FunctionSpec::Analytic(analytic_fixture("sin-inv").unwrap());
        match subdifferential(&f, &rvec(&[0])).unwrap() {
            SubdifferentialSet::Interval1D { lo, hi, .. } => {
                assert_eq!(lo, f64::NEG_INFINITY);
                assert!((hi - 1.5).abs() < 1e-3, "{hi}");
            }
            other => panic!("{other:?}"),
        }
        let fr = frechet_subdifferential(&f, &rvec(&[0])).unwrap();
        assert!(fr.contains_f64(&[0.5], 1e-3) && !fr.contains_f64(&[0.6], 1e-3));
    }

    #[test]
    fn stationary_points() {
        let f = analytic_fixture("sin-inv").unwrap();
        assert!(stationary_points_1d(&f, (0.001, 0.1), 100_000).len() >= 3);
        let h = analytic_fixture("half-square").unwrap();
        let r = stationary_points_1d(&h, (-1.0, 1.0), 1001);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-12);
        assert!(stationary_points_1d(&h, (1.0, 2.0), 100).is_empty());
    }
}
