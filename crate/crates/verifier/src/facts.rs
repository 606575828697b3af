//! Lazily computed quantities per fixture, shared by every suite in a run.

use std::sync::OnceLock;

use genhess::hessian::{definiteness, Definiteness, DefinitenessVerdict};
use genhess::model::FunctionSpec;
use genhess::rational::fmt_rat;
use genhess::regularity::{
    check_growth, check_single_valued_localization, estimate_metric_regularity_modulus, estimate_subregularity_modulus, is_local_minimizer,
    is_prox_regular, tilt_stability_verdict, GridVerdict, GrowthMode, GrowthReport, LocalizationReport, ModulusEstimate, TiltReport, TiltVerdict,
    MAX_TILT_DIM,
};
use genhess::subdiff::stationary_points_1d;
use serde_json::{json, Value};

use crate::fixtures::{Claim, ExpectedValue, Fixture};
use crate::outcome::Check;

type Fact<T> = OnceLock<Result<T, String>>;

pub struct Facts {
    pub fixture: Fixture,
    local_min: Fact<bool>,
    prox_regular: Fact<bool>,
    hessian: Fact<DefinitenessVerdict>,
    tilt: Fact<TiltReport>,
    subreg: Fact<ModulusEstimate>,
    metric: Fact<ModulusEstimate>,
    localization: Fact<LocalizationReport>,
    unit_growth: Fact<GrowthReport>,
    stationary: Fact<Vec<f64>>,
}

fn get<T: Clone>(cell: &Fact<T>, f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    cell.get_or_init(f).clone()
}

/// Interval searched for stationary points of one-dimensional fixtures.
pub const STATIONARY_WINDOW: (f64, f64) = (0.001, 0.1);

impl Facts {
    pub fn new(fixture: Fixture) -> Self {
        Facts {
            fixture,
            local_min: OnceLock::new(),
            prox_regular: OnceLock::new(),
            hessian: OnceLock::new(),
            tilt: OnceLock::new(),
            subreg: OnceLock::new(),
            metric: OnceLock::new(),
            localization: OnceLock::new(),
            unit_growth: OnceLock::new(),
            stationary: OnceLock::new(),
        }
    }

    pub fn name(&self) -> &'static str {
        self.fixture.name
    }

    pub fn local_minimizer(&self) -> Result<bool, String> {
        let i = &self.fixture.instance;
        get(&self.local_min, || {
            let e = i.exact().map_err(|e| e.to_string())?;
            is_local_minimizer(e, &i.xbar, &i.xstar).map_err(|e| e.to_string())
        })
    }

    pub fn prox_regular(&self) -> Result<bool, String> {
        let i = &self.fixture.instance;
        get(&self.prox_regular, || {
            let e = i.exact().map_err(|e| e.to_string())?;
            is_prox_regular(e, &i.xbar, &i.xstar).map_err(|e| e.to_string())
        })
    }

    pub fn hessian(&self) -> Result<DefinitenessVerdict, String> {
        let i = &self.fixture.instance;
        get(&self.hessian, || definiteness(&i.f, &i.xbar, &i.xstar).map_err(|e| e.to_string()))
    }

    pub fn tilt(&self) -> Result<TiltReport, String> {
        get(&self.tilt, || tilt_stability_verdict(&self.fixture.instance).map_err(|e| e.to_string()))
    }

    pub fn subregularity(&self) -> Result<ModulusEstimate, String> {
        get(&self.subreg, || estimate_subregularity_modulus(&self.fixture.instance).map_err(|e| e.to_string()))
    }

    pub fn metric(&self) -> Result<ModulusEstimate, String> {
        get(&self.metric, || estimate_metric_regularity_modulus(&self.fixture.instance).map_err(|e| e.to_string()))
    }

    pub fn localization(&self) -> Result<LocalizationReport, String> {
        get(&self.localization, || check_single_valued_localization(&self.fixture.instance).map_err(|e| e.to_string()))
    }

    pub fn unit_growth(&self) -> Result<GrowthReport, String> {
        get(&self.unit_growth, || check_growth(&self.fixture.instance, 1.0, GrowthMode::NormSquared).map_err(|e| e.to_string()))
    }

    pub fn stationary_points(&self) -> Result<Vec<f64>, String> {
        get(&self.stationary, || match &self.fixture.instance.f {
            FunctionSpec::Analytic(a) => Ok(stationary_points_1d(a, STATIONARY_WINDOW, self.fixture.instance.params.samples_1d)),
            _ => Err("stationary points are computed for analytic fixtures only".into()),
        })
    }

    /// In the corpus used for the tilt equivalences: exact, n ≤ 3, x̄* = 0,
    /// validated local minimizer, prox-regular.
    pub fn tilt_corpus_member(&self) -> Result<bool, String> {
        let f = &self.fixture;
        if !f.is_exact() || f.dim() > MAX_TILT_DIM || !f.xstar_is_zero() {
            return Ok(false);
        }
        Ok(self.local_minimizer()? && self.prox_regular()?)
    }

    /// Evaluates one expected claim.
    pub fn claim_check(&self, c: Claim) -> Check {
        let name = format!("expected {}", c.name());
        let Some(exp) = self.fixture.expects(c) else {
            return Check::skipped(name, "no expectation recorded").on(self.name());
        };
        let computed = match self.compute(c) {
            Ok(v) => v,
            Err(e) => return Check::error(name, e).on(self.name()).with_provenance(&exp.provenance),
        };
        let (ok, detail) = compare(&exp.value, &computed);
        Check::verified(name, ok, detail).on(self.name()).with_provenance(&exp.provenance)
    }

    /// Every expected entry of this fixture.
    pub fn expectation_checks(&self) -> Vec<Check> {
        self.fixture.expected.keys().map(|&c| self.claim_check(c)).collect()
    }

    fn compute(&self, c: Claim) -> Result<Value, String> {
        Ok(match c {
            Claim::LocalMinimizer => json!(self.local_minimizer()?),
            Claim::ProxRegular => json!(self.prox_regular()?),
            Claim::Definiteness => json!(self.hessian()?.verdict),
            Claim::KernelTrivial => json!(self.hessian()?.kernel.is_trivial()),
            Claim::TiltStable => json!(self.tilt()?.is_stable()),
            Claim::TiltModulus => match self.tilt()?.verdict {
                TiltVerdict::Stable { kappa } => json!(kappa),
                TiltVerdict::Unstable { reason, .. } => return Err(format!("tilt unstable: {reason}")),
            },
            Claim::SubregularityModulus => json!(self.subregularity()?.value),
            Claim::MetricRegularity => {
                let m = self.metric()?;
                json!(m.value.is_finite() && m.converged)
            }
            Claim::MetricModulus => json!(self.metric()?.value),
            Claim::StrongRegularity => json!(self.localization()?.verdict == GridVerdict::NoCounterexampleOnGrid),
            Claim::UnitNormGrowth => json!(self.unit_growth()?.passed()),
            Claim::StationaryPoints => json!(self.stationary_points()?.len()),
        })
    }
}

fn compare(exp: &ExpectedValue, got: &Value) -> (bool, String) {
    match exp {
        ExpectedValue::Bool { value } => (got.as_bool() == Some(*value), format!("expected {value}, computed {got}")),
        ExpectedValue::Definiteness { value } => {
            let want = serde_json::to_value(value).expect("serializable");
            (got == &want, format!("expected {want}, computed {got}"))
        }
        ExpectedValue::Approx { value, tol, relative } => {
            let Some(x) = got.as_f64() else {
                return (false, format!("expected ≈ {value}, computed {got}"));
            };
            let bound = if *relative { tol * value.abs() } else { *tol };
            let ok = (x - value).abs() <= bound;
            let how = if *relative { format!("{}%", tol * 100.0) } else { format!("{tol:e}") };
            (ok, format!("expected {value} within {how}, computed {x}"))
        }
        ExpectedValue::AtLeast { value } => {
            let n = got.as_u64().unwrap_or(0) as usize;
            (n >= *value, format!("expected at least {value}, computed {n}"))
        }
    }
}

/// JSON view of a definiteness verdict with exact rationals as strings.
pub fn definiteness_json(d: &DefinitenessVerdict) -> Value {
    json!({
        "verdict": d.verdict,
        "kernel": d.kernel,
        "vertical_pieces": d.vertical_pieces,
        "witness": d.witness.as_ref().map(|w| json!({
            "u": w.u.iter().map(fmt_rat).collect::<Vec<_>>(),
            "ustar": w.ustar.iter().map(fmt_rat).collect::<Vec<_>>(),
            "inner": fmt_rat(&w.inner),
        })),
    })
}

/// Whether the kernel-plus-semidefinite combination holds.
pub fn kernel_and_semidefinite(d: &DefinitenessVerdict) -> bool {
    d.kernel.is_trivial() && d.verdict != Definiteness::Indefinite
}
