//! Report documents in JSON and markdown.
//!
//! The JSON layout is described in `book/src/report-schema.md`. Output is
//! deterministic: fields serialize in declaration order, suites in registry
//! order, and wall-clock times are omitted unless asked for.

use serde::Serialize;
use serde_json::Value;

use crate::outcome::{Status, SuiteResult};
use crate::probe::ProbeSummary;

pub const SCHEMA: &str = "genhess-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    Verify,
    Probe,
    Analyze,
}

#[derive(Clone, Debug, Serialize)]
pub struct Generator {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub suites: usize,
    pub checks: usize,
    pub pass: usize,
    pub no_counterexample_on_grid: usize,
    pub skipped: usize,
    pub fail: usize,
    pub escalations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub schema_version: u32,
    pub generator: Generator,
    pub kind: ReportKind,
    pub summary: Summary,
    pub results: Vec<SuiteResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Markdown,
}

impl Report {
    pub fn new(kind: ReportKind, results: Vec<SuiteResult>) -> Self {
        let mut summary = Summary { suites: results.len(), ..Default::default() };
        for r in &results {
            summary.escalations += r.escalations.len();
            for c in &r.checks {
                summary.checks += 1;
                match c.status() {
                    Status::Pass => summary.pass += 1,
                    Status::NoCounterexampleOnGrid => summary.no_counterexample_on_grid += 1,
                    Status::Skipped => summary.skipped += 1,
                    Status::Fail => summary.fail += 1,
                }
            }
        }
        Report {
            schema: SCHEMA,
            schema_version: SCHEMA_VERSION,
            generator: Generator { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
            kind,
            summary,
            results,
            probe: None,
            analysis: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.summary.fail > 0
    }

    /// 0 when nothing failed, 1 otherwise. Escalations do not count.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Markdown => self.to_markdown(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            ReportKind::Verify => "verification",
            ReportKind::Probe => "conjecture probe",
            ReportKind::Analyze => "analysis",
        };
        out.push_str(&format!("# genhess {kind} report\n\n"));
        out.push_str(&format!("Schema `{}` version {}, generated by {} {}.\n\n", self.schema, self.schema_version, self.generator.name, self.generator.version));
        let s = &self.summary;
        out.push_str("| suites | checks | pass | no counterexample on grid | skipped | fail | escalations |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n\n",
            s.suites, s.checks, s.pass, s.no_counterexample_on_grid, s.skipped, s.fail, s.escalations
        ));
        if let Some(p) = &self.probe {
            out.push_str("## Probe\n\n| seed | requested | generated | regenerated | not prox-regular | metrically regular | rechecked | escalations |\n");
            out.push_str("|---|---|---|---|---|---|---|---|\n");
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {} |\n\n",
                p.seed, p.requested, p.generated, p.regenerated, p.excluded_not_prox_regular, p.metrically_regular, p.rechecked, p.escalations
            ));
        }
        let escalated: Vec<_> = self.results.iter().flat_map(|r| r.escalations.iter().map(move |e| (r, e))).collect();
        if !escalated.is_empty() {
            out.push_str("## Escalations\n\nCandidate counterexamples. These are findings to examine, not failures.\n\n");
            for (r, e) in escalated {
                out.push_str(&format!("- **{}**: {}\n  - instance: `{}`\n  - metric modulus: `{}`\n  - witness: `{}`\n", r.suite, cell(&e.note), e.instance, e.metric_modulus, e.witness));
            }
            out.push('\n');
        }
        if let Some(a) = &self.analysis {
            out.push_str("## Analysis\n\n| quantity | value |\n|---|---|\n");
            if let Value::Object(m) = a {
                for (k, v) in m {
                    out.push_str(&format!("| {} | {} |\n", cell(k), cell(&compact(v))));
                }
            }
            out.push('\n');
        }
        for r in &self.results {
            out.push_str(&format!("## {}: {}\n\nStatus: **{}**", r.suite, r.title, r.status.label()));
            if let Some(ms) = r.runtime_ms {
                out.push_str(&format!(" ({ms} ms)"));
            }
            out.push_str("\n\n");
            if !r.checks.is_empty() {
                out.push_str("| check | fixture | kind | status | provenance | detail |\n|---|---|---|---|---|---|\n");
                for c in &r.checks {
                    let kind = match c.kind() {
                        crate::outcome::ClaimKind::Universal => "universal",
                        crate::outcome::ClaimKind::Existence => "existence",
                    };
                    out.push_str(&format!(
                        "| {} | {} | {} | {} | {} | {} |\n",
                        cell(c.name()),
                        cell(c.fixture().unwrap_or("")),
                        kind,
                        c.status().label(),
                        cell(c.provenance().unwrap_or("")),
                        cell(c.detail())
                    ));
                }
                out.push('\n');
            }
            if !r.artifacts.is_empty() {
                out.push_str("### Witnesses and moduli\n\n| fixture | artifact | value |\n|---|---|---|\n");
                for a in &r.artifacts {
                    out.push_str(&format!("| {} | {} | {} |\n", cell(&a.fixture), cell(&a.name), cell(&compact(&a.value))));
                }
                out.push('\n');
            }
        }
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        _ => format!("`{}`", serde_json::to_string(v).unwrap_or_default()),
    }
}

/// Escapes a markdown table cell.
fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid() {
        let r = Report::new(ReportKind::Verify, vec![]);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["summary"]["checks"], 0);
        assert_eq!(r.exit_code(), 0);
        assert!(r.to_markdown().contains("| 0 | 0 | 0 | 0 | 0 | 0 | 0 |"));
    }

    #[test]
    fn cells_escape_pipes() {
        assert_eq!(cell("a|b\nc"), "a\\|b c");
    }
}
