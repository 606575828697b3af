//! Grid estimates of regularity moduli, growth and prox inequalities, and tilt
//! stability.
//!
//! Neighborhoods are explicit balls with radii from [`Params`](crate::model::Params).
//! Sup-type quantities are maxima over finite nested lattices, so they are lower
//! bounds for the true moduli; a `converged` flag records whether two successive
//! lattice levels agreed within 2%.

pub mod grid;
mod growth;
mod localization;
mod moduli;
mod sampling;
mod structure;
mod tilt;

pub use grid::{GridSpec, Lattice};
pub use growth::{check_growth, check_lower_prox_inequality, GrowthMode, GrowthReport, ProxMode, ProxReport, ProxWitness};
pub use localization::{
    check_combined_lower_bound, check_single_valued_localization, check_uniform_growth, CombinedBoundReport, CombinedBoundViolation, GridVerdict, LocalizationReport,
    LocalizationWitness, UniformGrowthReport,
};
pub use moduli::{estimate_metric_regularity_modulus, estimate_subregularity_modulus, ModulusEstimate};
pub use structure::{is_local_minimizer, is_prox_regular};
pub use tilt::{solve_tilt, tilt_stability_verdict, TiltReport, TiltSample, TiltSolution, TiltVerdict, MAX_TILT_DIM};

use serde::Serializer;
use thiserror::Error;

use crate::hessian::HessianError;
use crate::model::ModelError;
use crate::polygeom::GeomError;
use crate::subdiff::SubdiffError;

#[derive(Debug, Error)]
pub enum RegularityError {
    #[error("operation needs an exact (quadratic plus polyhedral) function")]
    NeedsExact,
    #[error("dimension {0} is above the supported maximum {MAX_TILT_DIM}")]
    DimensionTooLarge(usize),
    #[error("feasible set is empty")]
    EmptyFeasibleSet,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Subdiff(#[from] SubdiffError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Hessian(#[from] HessianError),
}

/// Writes non-finite floats as the strings `"inf"`, `"-inf"` and `"nan"` so reports stay valid JSON.
pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn serialize_f64s<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&F64(*x))?;
    }
    seq.end()
}

struct F64(f64);

impl serde::Serialize for F64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_f64(&self.0, s)
    }
}

/// Larger ratio wins; ties go to the lexicographically smaller point so parallel reductions are deterministic.
pub(crate) fn better_max(a: (f64, Vec<f64>), b: (f64, Vec<f64>)) -> (f64, Vec<f64>) {
    match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Greater) => a,
        Some(std::cmp::Ordering::Less) => b,
        _ => {
            if lex_le(&a.1, &b.1) {
                a
            } else {
                b
            }
        }
    }
}

pub(crate) fn lex_le(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    true
}
