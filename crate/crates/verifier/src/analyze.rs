//! One-shot analysis of a user problem file.

use serde::Serialize;
use serde_json::{json, Map, Value};

use genhess::model::{parse_problem, FunctionSpec, ProblemInstance};
use genhess::rational::fmt_rat;
use genhess::regularity::{
    check_growth, check_lower_prox_inequality, check_single_valued_localization, estimate_metric_regularity_modulus, estimate_subregularity_modulus,
    is_local_minimizer, is_prox_regular, tilt_stability_verdict, GrowthMode, ProxMode, MAX_TILT_DIM,
};
use genhess::subdiff::{stationary_points_1d, subdifferential, SubdifferentialSet};

use crate::facts::{definiteness_json, STATIONARY_WINDOW};
use crate::outcome::{Check, SuiteResult};
use crate::report::{Report, ReportKind};

/// Parameter overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub grid: Option<usize>,
}

/// The problem could not be read or is invalid.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn load(text: &str, o: &Overrides) -> Result<ProblemInstance, InputError> {
    let mut inst = parse_problem(text).map_err(|e| InputError(e.to_string()))?;
    let p = &mut inst.params;
    if let Some(v) = o.eta {
        p.eta = v;
    }
    if let Some(v) = o.delta {
        p.delta = v;
    }
    if let Some(v) = o.gamma {
        p.gamma = v;
    }
    if let Some(v) = o.grid {
        p.grid = v;
    }
    p.validate().map_err(|e| InputError(e.to_string()))?;
    Ok(inst)
}

fn subdiff_json(s: &SubdifferentialSet) -> Value {
    match s {
        SubdifferentialSet::Exact { base, cones } => json!({
            "base": base.iter().map(fmt_rat).collect::<Vec<_>>(),
            "cones": cones.pieces().iter().map(|c| json!({
                "rays": c.rays().iter().map(|r| r.iter().map(fmt_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "lines": c.lines().iter().map(|r| r.iter().map(fmt_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
        SubdifferentialSet::Interval1D { lo, hi, lo_closed, hi_closed, tol } => {
            json!({"lo": lo, "hi": hi, "lo_closed": lo_closed, "hi_closed": hi_closed, "tol": tol})
        }
    }
}

struct Sheet {
    values: Map<String, Value>,
    errors: Vec<Check>,
}

impl Sheet {
    fn put<T: Serialize, E: std::fmt::Display>(&mut self, key: &str, r: Result<T, E>) {
        match r {
            Ok(v) => {
                self.values.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
            }
            Err(e) => self.errors.push(Check::error(key, e)),
        }
    }
}

/// Computes everything that applies to the instance. Operations that fail
/// become failing checks; the rest go into the `analysis` object.
pub fn analyze(inst: &ProblemInstance, label: &str) -> Report {
    let mut s = Sheet { values: Map::new(), errors: Vec::new() };
    s.values.insert("instance".into(), inst.to_json());
    s.put("subdifferential", subdifferential(&inst.f, &inst.xbar).map(|d| subdiff_json(&d)));
    s.put("definiteness", genhess::hessian::definiteness(&inst.f, &inst.xbar, &inst.xstar).map(|d| definiteness_json(&d)));
    s.put("subregularity_modulus", estimate_subregularity_modulus(inst));
    s.put("growth_norm_squared", check_growth(inst, 1.0, GrowthMode::NormSquared));
    match &inst.f {
        FunctionSpec::Exact(e) => {
            s.put("local_minimizer", is_local_minimizer(e, &inst.xbar, &inst.xstar));
            s.put("prox_regular", is_prox_regular(e, &inst.xbar, &inst.xstar));
            s.put("growth_distance_squared", check_growth(inst, 1.0, GrowthMode::DistanceSquared));
            s.put("lower_estimate", check_lower_prox_inequality(inst, 0.0, ProxMode::BaseDistance));
            s.put("metric_regularity_modulus", estimate_metric_regularity_modulus(inst));
            s.put("single_valued_localization", check_single_valued_localization(inst));
            if e.dim() <= MAX_TILT_DIM {
                s.put("tilt_stability", tilt_stability_verdict(inst));
            }
        }
        FunctionSpec::Analytic(a) => {
            s.put::<_, String>("stationary_points", Ok(stationary_points_1d(a, STATIONARY_WINDOW, inst.params.samples_1d)));
        }
    }
    let result = SuiteResult::new("ANALYZE", label, s.errors, vec![]);
    let mut report = Report::new(ReportKind::Analyze, vec![result]);
    report.analysis = Some(Value::Object(s.values));
    report
}
