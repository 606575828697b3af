//! Representable functions, their evaluation, and problem-file ingestion.

use std::sync::{Arc, OnceLock};

use num::{One, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::polygeom::{CellComplex, ConvexPolyhedron, GeomError, PolyUnion};
use crate::rational::{dot, fmt_rat, int, mat_vec, parse_rat, sub, to_f64, vec_f64, RVec, Rat};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// ½xᵀQx + cᵀx + d with rational data and symmetric Q.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub q: Vec<RVec>,
    pub c: RVec,
    pub d: Rat,
}

impl QuadraticForm {
    pub fn new(q: Vec<RVec>, c: RVec, d: Rat) -> Result<Self, ModelError> {
        let n = c.len();
        if q.len() != n {
            return Err(ModelError::DimensionMismatch { expected: n, got: q.len() });
        }
        for (i, row) in q.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::DimensionMismatch { expected: n, got: row.len() });
            }
            for j in 0..i {
                if q[i][j] != q[j][i] {
                    return Err(ModelError::Validation("Q is not symmetric".into()));
                }
            }
        }
        Ok(QuadraticForm { q, c, d })
    }

    pub fn diagonal(diag: &[Rat]) -> Self {
        let n = diag.len();
        let q = (0..n).map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { Rat::zero() }).collect()).collect();
        QuadraticForm { q, c: vec![Rat::zero(); n], d: Rat::zero() }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn value(&self, x: &[Rat]) -> Rat {
        dot(x, &mat_vec(&self.q, x)) / int(2) + dot(&self.c, x) + &self.d
    }

    pub fn gradient(&self, x: &[Rat]) -> RVec {
        mat_vec(&self.q, x).iter().zip(&self.c).map(|(a, b)| a + b).collect()
    }

    pub fn value_f64(&self, x: &[f64]) -> f64 {
        let g = self.q_times_f64(x);
        0.5 * dot_f(x, &g) + dot_f(&vec_f64(&self.c), x) + to_f64(&self.d)
    }

    pub fn gradient_f64(&self, x: &[f64]) -> Vec<f64> {
        self.q_times_f64(x).iter().zip(&self.c).map(|(a, b)| a + to_f64(b)).collect()
    }

    pub fn q_f64(&self) -> Vec<Vec<f64>> {
        self.q.iter().map(|r| vec_f64(r)).collect()
    }

    fn q_times_f64(&self, x: &[f64]) -> Vec<f64> {
        self.q.iter().map(|r| r.iter().zip(x).map(|(a, b)| to_f64(a) * b).sum()).collect()
    }
}

pub(crate) fn dot_f(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A closed-or-open real interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        (x > self.lo || (self.lo_closed && x == self.lo)) && (x < self.hi || (self.hi_closed && x == self.hi))
    }
}

/// A one-dimensional function given by closed-form value and derivative.
#[derive(Clone, Debug)]
pub struct AnalyticFixture1D {
    pub name: &'static str,
    pub domain: Interval,
    pub value: fn(f64) -> f64,
    pub derivative: fn(f64) -> f64,
    pub exceptional: Vec<f64>,
    pub description: &'static str,
}

impl AnalyticFixture1D {
    pub fn eval(&self, x: f64) -> f64 {
        if self.domain.contains(x) {
            (self.value)(x)
        } else {
            f64::INFINITY
        }
    }
}

fn sin_inv_value(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        0.5 * x - x * x * (1.0 / x).sin()
    }
}

fn sin_inv_derivative(x: f64) -> f64 {
    0.5 - 2.0 * x * (1.0 / x).sin() + (1.0 / x).cos()
}

/// Built-in analytic fixtures by name.
pub fn analytic_fixture(name: &str) -> Option<AnalyticFixture1D> {
    match name {
        "sin-inv" => Some(AnalyticFixture1D {
            name: "sin-inv",
            domain: Interval { lo: 0.0, hi: f64::INFINITY, lo_closed: true, hi_closed: false },
            value: sin_inv_value,
            derivative: sin_inv_derivative,
            exceptional: vec![0.0],
            description: "x/2 - x^2 sin(1/x) for x > 0, 0 at 0, +inf for x < 0. Grows quadratically at 0 \
                          while 0 is not an isolated solution of 0 in df(x); the reading used is that 0 is not \
                          isolated in the inverse image of the reference subgradient 0.",
        }),
        "half-square" => Some(AnalyticFixture1D {
            name: "half-square",
            domain: Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_closed: false, hi_closed: false },
            value: |x| 0.5 * x * x,
            derivative: |x| x,
            exceptional: vec![],
            description: "x^2/2 on the real line.",
        }),
        _ => None,
    }
}

pub fn analytic_fixture_names() -> &'static [&'static str] {
    &["sin-inv", "half-square"]
}

/// Quadratic plus the indicator of a polyhedral union.
#[derive(Clone, Debug)]
pub struct ExactFunction {
    smooth: QuadraticForm,
    domain: PolyUnion,
    complex: OnceLock<Arc<CellComplex>>,
}

impl ExactFunction {
    pub fn new(smooth: QuadraticForm, domain: PolyUnion) -> Result<Self, ModelError> {
        if smooth.dim() != domain.dim() {
            return Err(ModelError::DimensionMismatch { expected: smooth.dim(), got: domain.dim() });
        }
        Ok(ExactFunction { smooth, domain, complex: OnceLock::new() })
    }

    /// Smooth quadratic on all of Rⁿ.
    pub fn unconstrained(smooth: QuadraticForm) -> Self {
        let n = smooth.dim();
        let domain = PolyUnion::new(vec![ConvexPolyhedron::full(n)]).expect("full space is nonempty");
        ExactFunction { smooth, domain, complex: OnceLock::new() }
    }

    pub fn smooth(&self) -> &QuadraticForm {
        &self.smooth
    }
    pub fn domain(&self) -> &PolyUnion {
        &self.domain
    }
    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    /// Cell complex of the whole domain, built once.
    pub fn complex(&self) -> Arc<CellComplex> {
        self.complex.get_or_init(|| Arc::new(CellComplex::build(self.dim(), self.domain.pieces()))).clone()
    }

    /// Value, or `None` for +∞.
    pub fn value(&self, x: &[Rat]) -> Option<Rat> {
        self.domain.contains(x).then(|| self.smooth.value(x))
    }

    pub fn in_domain_f64(&self, x: &[f64], tol: f64) -> bool {
        self.domain.pieces().iter().any(|p| p.contains_f64(x, tol))
    }
}

#[derive(Clone, Debug)]
pub enum FunctionSpec {
    Exact(ExactFunction),
    Analytic(AnalyticFixture1D),
}

impl FunctionSpec {
    pub fn dim(&self) -> usize {
        match self {
            FunctionSpec::Exact(e) => e.dim(),
            FunctionSpec::Analytic(_) => 1,
        }
    }

    pub fn as_exact(&self) -> Result<&ExactFunction, ModelError> {
        match self {
            FunctionSpec::Exact(e) => Ok(e),
            FunctionSpec::Analytic(a) => Err(ModelError::Unsupported(format!("analytic fixture {} has no exact structure", a.name))),
        }
    }

    /// Extended-real value at a float point; rational domain tests are exact.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(match self {
            FunctionSpec::Exact(e) => {
                let xr: RVec = x.iter().map(|v| crate::rational::from_f64(*v)).collect();
                if e.domain.contains(&xr) {
                    e.smooth.value_f64(x)
                } else {
                    f64::INFINITY
                }
            }
            FunctionSpec::Analytic(a) => a.eval(x[0]),
        })
    }

    /// Exact value for the exact class; `None` is +∞.
    pub fn evaluate_exact(&self, x: &[Rat]) -> Result<Option<Rat>, ModelError> {
        let e = self.as_exact()?;
        if x.len() != e.dim() {
            return Err(ModelError::DimensionMismatch { expected: e.dim(), got: x.len() });
        }
        Ok(e.value(x))
    }
}

/// Adds (θ/2)‖x − center‖² to the smooth part.
pub fn regularize(f: &FunctionSpec, theta: &Rat, center: &[Rat]) -> Result<FunctionSpec, ModelError> {
    let e = f.as_exact()?;
    let n = e.dim();
    if center.len() != n {
        return Err(ModelError::DimensionMismatch { expected: n, got: center.len() });
    }
    let s = &e.smooth;
    let mut q = s.q.clone();
    for (i, row) in q.iter_mut().enumerate() {
        row[i] += theta;
    }
    let c = sub(&s.c, &center.iter().map(|x| theta * x).collect::<Vec<_>>());
    let d = &s.d + theta * dot(center, center) / int(2);
    Ok(FunctionSpec::Exact(ExactFunction::new(QuadraticForm { q, c, d }, e.domain.clone())?))
}

/// Neighborhood radii, grid densities and tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub eta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub rho: f64,
    /// Lattice points per radius at the coarsest level.
    pub grid: usize,
    pub max_refinements: usize,
    pub tol: f64,
    /// Grid size for one-dimensional analytic fixtures.
    pub samples_1d: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params { eta: 0.1, delta: 0.1, gamma: 0.5, rho: 0.05, grid: 4, max_refinements: 3, tol: 1e-9, samples_1d: 100_000 }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), ModelError> {
        let pos = [("eta", self.eta), ("delta", self.delta), ("gamma", self.gamma), ("rho", self.rho), ("tol", self.tol)];
        for (k, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::Validation(format!("parameter {k} must be positive, got {v}")));
            }
        }
        if self.grid == 0 || self.samples_1d < 2 {
            return Err(ModelError::Validation("parameters grid and samples_1d must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub f: FunctionSpec,
    pub xbar: RVec,
    pub xstar: RVec,
    pub params: Params,
}

impl ProblemInstance {
    /// Checks dimensions, parameters and x̄* ∈ ∂f(x̄).
    pub fn new(f: FunctionSpec, xbar: RVec, xstar: RVec, params: Params) -> Result<Self, ModelError> {
        let n = f.dim();
        for v in [&xbar, &xstar] {
            if v.len() != n {
                return Err(ModelError::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        params.validate()?;
        let sd = crate::subdiff::subdifferential(&f, &xbar).map_err(|e| ModelError::Validation(e.to_string()))?;
        if !sd.contains(&xstar) {
            return Err(ModelError::Validation(format!(
                "xstar ({}) is not a subgradient at xbar",
                xstar.iter().map(fmt_rat).collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(ProblemInstance { f, xbar, xstar, params })
    }

    pub fn exact(&self) -> Result<&ExactFunction, ModelError> {
        self.f.as_exact()
    }

    pub fn xbar_f64(&self) -> Vec<f64> {
        vec_f64(&self.xbar)
    }
    pub fn xstar_f64(&self) -> Vec<f64> {
        vec_f64(&self.xstar)
    }

    pub fn to_json(&self) -> Value {
        let rv = |v: &[Rat]| Value::Array(v.iter().map(|x| Value::String(fmt_rat(x))).collect());
        let mut m = Map::new();
        match &self.f {
            FunctionSpec::Exact(e) => {
                m.insert("variant".into(), json!("exact"));
                let s = e.smooth();
                m.insert("smooth".into(), json!({"Q": s.q.iter().map(|r| rv(r)).collect::<Vec<_>>(), "c": rv(&s.c), "d": fmt_rat(&s.d)}));
                let pieces: Vec<Value> =
                    e.domain().pieces().iter().map(|p| json!({"A": p.a().iter().map(|r| rv(r)).collect::<Vec<_>>(), "b": rv(p.b())})).collect();
                m.insert("pieces".into(), Value::Array(pieces));
            }
            FunctionSpec::Analytic(a) => {
                m.insert("variant".into(), json!("analytic"));
                m.insert("fixture".into(), json!(a.name));
            }
        }
        m.insert("xbar".into(), rv(&self.xbar));
        m.insert("xstar".into(), rv(&self.xstar));
        let p = &self.params;
        m.insert(
            "params".into(),
            json!({"eta": p.eta, "delta": p.delta, "gamma": p.gamma, "rho": p.rho, "grid": p.grid, "max_refinements": p.max_refinements, "tol": p.tol, "samples_1d": p.samples_1d}),
        );
        Value::Object(m)
    }
}

fn perr<T>(msg: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError::Parse(msg.into()))
}

fn rat_of(v: &Value, what: &str) -> Result<Rat, ModelError> {
    match v {
        Value::String(s) => parse_rat(s).ok_or_else(|| ModelError::Parse(format!("{what}: not a rational literal: {s:?}"))),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(int(i)),
            None => perr(format!("{what}: floating-point literal {n} not allowed, write \"p/q\"")),
        },
        _ => perr(format!("{what}: expected a rational")),
    }
}

fn rvec_of(v: &Value, what: &str) -> Result<RVec, ModelError> {
    v.as_array().ok_or_else(|| ModelError::Parse(format!("{what}: expected an array")))?.iter().map(|x| rat_of(x, what)).collect()
}

fn rmat_of(v: &Value, what: &str) -> Result<Vec<RVec>, ModelError> {
    v.as_array().ok_or_else(|| ModelError::Parse(format!("{what}: expected an array of rows")))?.iter().map(|r| rvec_of(r, what)).collect()
}

fn param_f64(v: &Value, what: &str) -> Result<f64, ModelError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| ModelError::Parse(format!("{what}: bad number"))),
        Value::String(s) => parse_rat(s).map(|r| to_f64(&r)).ok_or_else(|| ModelError::Parse(format!("{what}: bad number {s:?}"))),
        _ => perr(format!("{what}: expected a number")),
    }
}

fn parse_params(v: Option<&Value>) -> Result<Params, ModelError> {
    let mut p = Params::default();
    let Some(v) = v else {
        return Ok(p);
    };
    let obj = v.as_object().ok_or_else(|| ModelError::Parse("params: expected an object".into()))?;
    for (k, val) in obj {
        match k.as_str() {
            "eta" => p.eta = param_f64(val, k)?,
            "delta" => p.delta = param_f64(val, k)?,
            "gamma" => p.gamma = param_f64(val, k)?,
            "rho" => p.rho = param_f64(val, k)?,
            "tol" => p.tol = param_f64(val, k)?,
            "grid" => p.grid = val.as_u64().ok_or_else(|| ModelError::Parse("grid: expected a positive integer".into()))? as usize,
            "max_refinements" => {
                p.max_refinements = val.as_u64().ok_or_else(|| ModelError::Parse("max_refinements: expected an integer".into()))? as usize
            }
            "samples_1d" => p.samples_1d = val.as_u64().ok_or_else(|| ModelError::Parse("samples_1d: expected an integer".into()))? as usize,
            other => return perr(format!("params: unknown key {other:?}")),
        }
    }
    Ok(p)
}

/// Reads a problem file (JSON) and validates it.
pub fn parse_problem(text: &str) -> Result<ProblemInstance, ModelError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| ModelError::Parse("expected a JSON object".into()))?;
    let get = |k: &str| obj.get(k).ok_or_else(|| ModelError::Parse(format!("missing field {k:?}")));
    let variant = get("variant")?.as_str().ok_or_else(|| ModelError::Parse("variant: expected a string".into()))?;
    let f = match variant {
        "exact" => {
            let smooth = get("smooth")?;
            let q = rmat_of(smooth.get("Q").ok_or_else(|| ModelError::Parse("smooth.Q missing".into()))?, "smooth.Q")?;
            let n = q.len();
            let c = match smooth.get("c") {
                Some(c) => rvec_of(c, "smooth.c")?,
                None => vec![Rat::zero(); n],
            };
            let d = match smooth.get("d") {
                Some(d) => rat_of(d, "smooth.d")?,
                None => Rat::zero(),
            };
            let smooth = QuadraticForm::new(q, c, d)?;
            let n = smooth.dim();
            let pieces = match obj.get("pieces") {
                None => vec![ConvexPolyhedron::full(n)],
                Some(ps) => ps
                    .as_array()
                    .ok_or_else(|| ModelError::Parse("pieces: expected an array".into()))?
                    .iter()
                    .map(|p| {
                        let a = rmat_of(p.get("A").ok_or_else(|| ModelError::Parse("piece.A missing".into()))?, "piece.A")?;
                        let b = rvec_of(p.get("b").ok_or_else(|| ModelError::Parse("piece.b missing".into()))?, "piece.b")?;
                        Ok(ConvexPolyhedron::new(a, b, n)?)
                    })
                    .collect::<Result<Vec<_>, ModelError>>()?,
            };
            FunctionSpec::Exact(ExactFunction::new(smooth, PolyUnion::new(pieces)?)?)
        }
        "analytic" => {
            let name = get("fixture")?.as_str().ok_or_else(|| ModelError::Parse("fixture: expected a name".into()))?;
            FunctionSpec::Analytic(analytic_fixture(name).ok_or_else(|| ModelError::Parse(format!("unknown analytic fixture {name:?}")))?)
        }
        other => return perr(format!("unknown variant {other:?}")),
    };
    let xbar = rvec_of(get("xbar")?, "xbar")?;
    let xstar = rvec_of(get("xstar")?, "xstar")?;
    let params = parse_params(obj.get("params"))?;
    ProblemInstance::new(f, xbar, xstar, params)
}

/// ½xᵀQx helper for building fixtures in code.
pub fn quadratic(q: Vec<RVec>, c: RVec) -> QuadraticForm {
    QuadraticForm::new(q, c, Rat::zero()).expect("well-formed quadratic")
}

pub fn identity(n: usize) -> Vec<RVec> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, rvec};

    const WEDGE: &str = r#"{"variant":"exact","smooth":{"Q":[[2,0],[0,-2]],"c":[0,0],"d":0},
        "pieces":[{"A":[[-1,1],[-1,-1]],"b":[0,0]}],"xbar":[0,0],"xstar":[0,0]}"#;

    #[test]
    fn wedge_file_loads() {
        let inst = parse_problem(WEDGE).unwrap();
        assert_eq!(inst.f.evaluate(&[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(inst.f.evaluate(&[0.0, 1.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn bad_subgradient_rejected() {
        let t = WEDGE.replace(r#""xstar":[0,0]"#, r#""xstar":[0,5]"#);
        assert!(matches!(parse_problem(&t), Err(ModelError::Validation(_))));
    }

    #[test]
    fn float_literals_rejected() {
        let t = WEDGE.replace("[[2,0]", "[[2.0,0]");
        assert!(matches!(parse_problem(&t), Err(ModelError::Parse(_))));
    }

    #[test]
    fn dimension_mismatch_reported() {
        let t = WEDGE.replace(r#""xbar":[0,0]"#, r#""xbar":[0]"#);
        assert!(matches!(parse_problem(&t), Err(ModelError::DimensionMismatch { .. })));
    }

    #[test]
    fn sin_inv_at_zero() {
        let f = FunctionSpec::Analytic(analytic_fixture("sin-inv").unwrap());
        assert_eq!(f.evaluate(&[0.0]).unwrap(), 0.0);
        assert_eq!(f.evaluate(&[-0.1]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn regularize_adds_quadratic() {
        let half = FunctionSpec::Exact(ExactFunction::unconstrained(QuadraticForm::diagonal(&[frac(1, 1)])));
        let r = regularize(&half, &int(1), &rvec(&[0])).unwrap();
        assert_eq!(r.as_exact().unwrap().smooth().q, vec![rvec(&[2])]);
    }
}
