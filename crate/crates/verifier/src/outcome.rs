//! Check and suite results.
//!
//! A check on an existence-quantified clause ("there is a neighborhood...",
//! "for every u* there is a u...") can only be refuted on a finite grid, so
//! [`Check::grid`] maps success to [`Status::NoCounterexampleOnGrid`] and
//! never to [`Status::Pass`]. Status fields are private to keep that rule.

use serde::Serialize;
use serde_json::Value;

use genhess::regularity::GridVerdict;

use crate::fixtures::Provenance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    NoCounterexampleOnGrid,
    Skipped,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::NoCounterexampleOnGrid => "no-counterexample-on-grid",
            Status::Skipped => "skipped",
            Status::Fail => "fail",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    /// Decided exactly, or a universal statement checked on every sample.
    Universal,
    /// Asserts existence of neighborhoods or points; only refutable.
    Existence,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixture: Option<String>,
    kind: ClaimKind,
    status: Status,
    detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

impl Check {
    pub fn verified(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Check::new(name, ClaimKind::Universal, if ok { Status::Pass } else { Status::Fail }, detail)
    }

    pub fn grid(name: impl Into<String>, verdict: GridVerdict, detail: impl Into<String>) -> Self {
        let status = match verdict {
            GridVerdict::NoCounterexampleOnGrid => Status::NoCounterexampleOnGrid,
            GridVerdict::Fails => Status::Fail,
        };
        Check::new(name, ClaimKind::Existence, status, detail)
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Check::new(name, ClaimKind::Universal, Status::Skipped, reason)
    }

    pub fn error(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Check::new(name, ClaimKind::Universal, Status::Fail, format!("error: {err}"))
    }

    fn new(name: impl Into<String>, kind: ClaimKind, status: Status, detail: impl Into<String>) -> Self {
        Check { name: name.into(), fixture: None, kind, status, detail: detail.into(), provenance: None }
    }

    pub fn on(mut self, fixture: &str) -> Self {
        self.fixture = Some(fixture.to_string());
        self
    }

    pub fn with_provenance(mut self, p: &Provenance) -> Self {
        self.provenance = Some(p.tag());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn fixture(&self) -> Option<&str> {
        self.fixture.as_deref()
    }
    pub fn kind(&self) -> ClaimKind {
        self.kind
    }
    pub fn status(&self) -> Status {
        self.status
    }
    pub fn detail(&self) -> &str {
        &self.detail
    }
    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }
}

/// A witness, modulus or other computed value attached to a suite.
#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub fixture: String,
    pub name: String,
    pub value: Value,
}

/// A candidate counterexample from the conjecture probe. Never a failure.
#[derive(Clone, Debug, Serialize)]
pub struct Escalation {
    pub instance: Value,
    pub metric_modulus: Value,
    pub witness: Value,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub title: String,
    pub status: Status,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub escalations: Vec<Escalation>,
    /// Wall-clock time; left out of JSON unless timings are requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl SuiteResult {
    pub fn new(suite: &str, title: &str, checks: Vec<Check>, artifacts: Vec<Artifact>) -> Self {
        let status = overall(&checks);
        SuiteResult { suite: suite.into(), title: title.into(), status, checks, artifacts, escalations: vec![], runtime_ms: None }
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Fail beats everything; then no-counterexample; then pass. All-skipped is skipped.
pub fn overall(checks: &[Check]) -> Status {
    if checks.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else if checks.iter().any(|c| c.status == Status::NoCounterexampleOnGrid) {
        Status::NoCounterexampleOnGrid
    } else if !checks.is_empty() && checks.iter().all(|c| c.status == Status::Skipped) {
        Status::Skipped
    } else {
        Status::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn existence_claims_never_pass() {
        let c = Check::grid("g", GridVerdict::NoCounterexampleOnGrid, "");
        assert_eq!(c.status(), Status::NoCounterexampleOnGrid);
        assert_eq!(c.kind(), ClaimKind::Existence);
        assert_eq!(Check::grid("g", GridVerdict::Fails, "").status(), Status::Fail);
    }

    #[test]
    fn overall_status() {
        assert_eq!(overall(&[]), Status::Pass);
        let p = Check::verified("a", true, "");
        let g = Check::grid("b", GridVerdict::NoCounterexampleOnGrid, "");
        let f = Check::verified("c", false, "");
        assert_eq!(overall(&[p.clone(), g.clone()]), Status::NoCounterexampleOnGrid);
        assert_eq!(overall(&[p, g, f]), Status::Fail);
        assert_eq!(overall(&[Check::skipped("s", "why")]), Status::Skipped);
    }
}
