//! Brute-force approximation of limiting normal cones by sampling.
//!
//! Random points near the base point are projected onto the union in floating
//! point. At each projection p the regular normal cone is read off from the
//! pieces containing p and their active rows: it is the intersection over those
//! pieces of the cones spanned by the active rows. The union of all cones seen
//! approximates the outer limit of regular normals. None of this uses the cell
//! complex that the exact computation is built on.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use genhess::hessian::{build_graph_model, graph_normal_cone_limiting};
use genhess::polygeom::{limiting_normal_cone, union_covers, ConeUnion, PolyCone, PolyUnion};
use genhess::rational::{vec_f64, Rat};
use genhess::regularity::serialize_f64;

use crate::fixtures::Fixture;

/// Slack for deciding piece membership and active rows at a float projection.
const ACTIVE_TOL: f64 = 1e-9;
/// Unit vectors drawn per cone when estimating the sphere-section distance.
const SPHERE_DRAWS: usize = 64;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const SAMPLE_RADIUS: f64 = 0.05;
pub const HAUSDORFF_TOL: f64 = 1e-6;

/// Fixtures whose domain and graph cones are compared against the sampler.
pub const DESIGNATED: [&str; 5] = ["cross-axes", "wedge-saddle", "reentrant-corner", "complementarity-quad", "orthant-quad"];

#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub fixture: String,
    /// "domain" or "graph".
    pub object: String,
    pub samples: usize,
    pub signatures: usize,
    pub sampled_cones: usize,
    pub exact_cones: usize,
    pub sampled_covers_exact: bool,
    pub exact_covers_sampled: bool,
    /// Hausdorff distance of the unit-sphere sections: zero when the two
    /// unions cover each other, otherwise a sampled lower bound.
    #[serde(serialize_with = "serialize_f64")]
    pub hausdorff: f64,
}

impl OracleComparison {
    pub fn agrees(&self) -> bool {
        self.sampled_covers_exact && self.exact_covers_sampled && self.hausdorff <= HAUSDORFF_TOL
    }
}

/// Per piece: `None` when the point is outside, otherwise its active rows.
type Signature = Vec<Option<Vec<usize>>>;

fn signature_at(u: &PolyUnion, p: &[f64]) -> Signature {
    u.pieces()
        .iter()
        .map(|piece| {
            let inside = piece.distance(p).map(|d| d <= ACTIVE_TOL).unwrap_or(false);
            inside.then(|| {
                (0..piece.rows())
                    .filter(|&i| {
                        let ax: f64 = piece.a()[i].iter().zip(p).map(|(a, x)| genhess::rational::to_f64(a) * x).sum();
                        (ax - genhess::rational::to_f64(&piece.b()[i])).abs() <= ACTIVE_TOL
                    })
                    .collect()
            })
        })
        .collect()
}

fn cone_of(u: &PolyUnion, sig: &Signature) -> PolyCone {
    let dim = u.dim();
    let mut cone = PolyCone::full(dim);
    for (piece, active) in u.pieces().iter().zip(sig) {
        if let Some(rows) = active {
            let gens: Vec<Vec<Rat>> = rows.iter().map(|&i| piece.a()[i].clone()).collect();
            cone = cone.intersect(&PolyCone::from_generators(dim, gens, vec![]));
        }
    }
    cone
}

fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

/// Union of regular normal cones at projections of `samples` random points.
pub fn sampled_normals(u: &PolyUnion, base: &[Rat], samples: usize, radius: f64, seed: u64) -> (Vec<PolyCone>, usize) {
    let dim = u.dim();
    let b = vec_f64(base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigs: BTreeSet<Signature> = BTreeSet::new();
    for _ in 0..samples {
        let d = random_in_ball(&mut rng, dim);
        let x: Vec<f64> = b.iter().zip(&d).map(|(b, d)| b + radius * d).collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for piece in u.pieces() {
            let Ok(p) = piece.project(&x) else { continue };
            let dist = p.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
                best = Some((dist, p));
            }
        }
        if let Some((_, p)) = best {
            sigs.insert(signature_at(u, &p));
        }
    }
    let mut cones: Vec<PolyCone> = Vec::new();
    for s in &sigs {
        let c = cone_of(u, s);
        if !cones.iter().any(|k| k.set_eq(&c)) {
            cones.push(c);
        }
    }
    (cones, sigs.len())
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-12).then(|| v.iter().map(|x| x / n).collect())
}

/// Distance from a unit vector to the unit-sphere section of a union of cones.
fn sphere_distance(v: &[f64], cones: &[PolyCone]) -> f64 {
    let mut best = f64::INFINITY;
    for c in cones {
        if c.is_zero() {
            continue;
        }
        let d = match unit(&c.project_f64(v)) {
            Some(p) => p.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            // v is in the polar; the nearest section point is orthogonal to it
            None => std::f64::consts::SQRT_2,
        };
        best = best.min(d);
    }
    best
}

fn sphere_points(c: &PolyCone, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut gens: Vec<Vec<f64>> = c.rays().iter().map(|r| vec_f64(r)).collect();
    for l in c.lines() {
        let l = vec_f64(l);
        gens.push(l.iter().map(|x| -x).collect());
        gens.push(l);
    }
    let mut out: Vec<Vec<f64>> = gens.iter().filter_map(|g| unit(g)).collect();
    if gens.is_empty() {
        return out;
    }
    for _ in 0..SPHERE_DRAWS {
        let mut v = vec![0.0; c.dim()];
        for g in &gens {
            let w: f64 = rng.gen_range(0.0..1.0);
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi += w * gi;
            }
        }
        if let Some(u) = unit(&v) {
            out.push(u);
        }
    }
    out
}

/// Sampled lower bound on the Hausdorff distance of the two sphere sections.
pub fn sphere_hausdorff(a: &[PolyCone], b: &[PolyCone], seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a_pts: Vec<Vec<f64>> = a.iter().flat_map(|c| sphere_points(c, &mut rng)).collect();
    let b_pts: Vec<Vec<f64>> = b.iter().flat_map(|c| sphere_points(c, &mut rng)).collect();
    if a_pts.is_empty() && b_pts.is_empty() {
        return 0.0;
    }
    let one = a_pts.iter().map(|v| sphere_distance(v, b)).fold(0.0, f64::max);
    let two = b_pts.iter().map(|v| sphere_distance(v, a)).fold(0.0, f64::max);
    one.max(two)
}

pub fn compare(fixture: &str, object: &str, u: &PolyUnion, base: &[Rat], exact: &ConeUnion, samples: usize, seed: u64) -> OracleComparison {
    let (sampled, signatures) = sampled_normals(u, base, samples, SAMPLE_RADIUS, seed);
    let ex = exact.pieces();
    let sampled_covers_exact = union_covers(&sampled, ex);
    let exact_covers_sampled = union_covers(ex, &sampled);
    let hausdorff = if sampled_covers_exact && exact_covers_sampled { 0.0 } else { sphere_hausdorff(&sampled, ex, seed ^ 0x9e37) };
    OracleComparison {
        fixture: fixture.into(),
        object: object.into(),
        samples,
        signatures,
        sampled_cones: sampled.len(),
        exact_cones: ex.len(),
        sampled_covers_exact,
        exact_covers_sampled,
        hausdorff,
    }
}

/// Domain and graph comparisons for one exact fixture.
pub fn compare_fixture(f: &Fixture, samples: usize, seed: u64) -> Result<Vec<OracleComparison>, String> {
    let i = &f.instance;
    let e = i.exact().map_err(|e| e.to_string())?;
    let dom = limiting_normal_cone(e.domain(), &i.xbar).map_err(|e| e.to_string())?;
    let model = build_graph_model(&i.f, &i.xbar, &i.xstar).map_err(|e| e.to_string())?;
    let gph = graph_normal_cone_limiting(&model).map_err(|e| e.to_string())?;
    Ok(vec![
        compare(f.name, "domain", e.domain(), &i.xbar, &dom, samples, seed),
        compare(f.name, "graph", &model.union(), &model.basepoint, &gph, samples, seed.wrapping_add(1)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use genhess::polygeom::ConvexPolyhedron;
    use genhess::rational::{int, rvec};

    #[test]
    fn hausdorff_of_distinct_rays() {
        let a = vec![PolyCone::from_generators(2, vec![rvec(&[1, 0])], vec![])];
        let b = vec![PolyCone::from_generators(2, vec![rvec(&[0, 1])], vec![])];
        let h = sphere_hausdorff(&a, &b, 1);
        assert!((h - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(sphere_hausdorff(&a, &a, 1), 0.0);
    }

    #[test]
    fn orthant_corner_is_sampled() {
        let p = ConvexPolyhedron::new(vec![rvec(&[-1, 0]), rvec(&[0, -1])], vec![int(0), int(0)], 2).unwrap();
        let u = PolyUnion::new(vec![p]).unwrap();
        let (cones, _) = sampled_normals(&u, &rvec(&[0, 0]), 2000, 0.05, 3);
        let corner = PolyCone::from_generators(2, vec![rvec(&[-1, 0]), rvec(&[0, -1])], vec![]);
        assert!(union_covers(&cones, &[corner]));
    }
}
