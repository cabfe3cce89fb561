//! Rendering a [`TestReport`] as text, JSON or JUnit XML.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use aspunit_core::assertions::Status;

use crate::runner::{CaseReport, TestReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Junit,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "junit" | "xunit" | "xunit-xml" => Ok(Format::Junit),
            other => Err(format!("unknown report format {other}; expected text, json or junit")),
        }
    }
}

pub fn render_report(r: &TestReport, format: Format) -> String {
    match format {
        Format::Text => render_text(r),
        Format::Json => render_json(r),
        Format::Junit => render_junit(r),
    }
}

/// The closing line of a text report.
pub fn summary_line(r: &TestReport) -> String {
    format!(
        "{} passed, {} failed, {} errors",
        r.totals.passed, r.totals.failed, r.totals.errored
    )
}

fn render_text(r: &TestReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "suite {} ({} cases)", r.suite_name, r.cases.len());
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for c in &r.cases {
        let tag = match c.status() {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        let _ = write!(out, "{tag} {} [{}]", c.name, c.mode.keyword());
        if let Some(s) = c.stats {
            let more = if s.complete { "" } else { "+" };
            let _ = write!(out, " {} rules, {}{more} answer sets", s.rules, s.answer_sets);
        }
        out.push('\n');
        for w in &c.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        for a in &c.assertions {
            let label = if a.assertion.is_empty() { &a.kind } else { &a.assertion };
            let _ = writeln!(out, "  {} {label}", a.status);
            if a.status != Status::Pass {
                let _ = writeln!(out, "    {}", a.detail);
                for (i, m) in a.witnesses.iter().zip(&a.witness_models) {
                    let _ = writeln!(out, "    answer set #{i}: {m}");
                }
            }
        }
    }
    out.push_str(&summary_line(r));
    out.push('\n');
    out
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonReport<'a> {
    suite: &'a str,
    started_at: String,
    totals: JsonTotals,
    warnings: &'a [String],
    cases: Vec<JsonCase<'a>>,
}

#[derive(Serialize)]
struct JsonTotals {
    passed: usize,
    failed: usize,
    errored: usize,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonCase<'a> {
    name: &'a str,
    mode: &'static str,
    status: Status,
    warnings: &'a [String],
    stats: Option<JsonStats>,
    transcript: Option<&'a str>,
    assertions: Vec<JsonAssertion<'a>>,
    duration_ms: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonStats {
    rules: usize,
    answer_sets: usize,
    complete: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonAssertion<'a> {
    kind: &'a str,
    assertion: &'a str,
    status: Status,
    detail: &'a str,
    witnesses: &'a [usize],
    witness_models: &'a [String],
}

fn json_case(c: &CaseReport) -> JsonCase<'_> {
    JsonCase {
        name: &c.name,
        mode: c.mode.keyword(),
        status: c.status(),
        warnings: &c.warnings,
        stats: c.stats.map(|s| JsonStats {
            rules: s.rules,
            answer_sets: s.answer_sets,
            complete: s.complete,
        }),
        transcript: c.transcript.as_deref(),
        assertions: c
            .assertions
            .iter()
            .map(|a| JsonAssertion {
                kind: &a.kind,
                assertion: &a.assertion,
                status: a.status,
                detail: &a.detail,
                witnesses: &a.witnesses,
                witness_models: &a.witness_models,
            })
            .collect(),
        duration_ms: c.duration.as_millis() as u64,
    }
}

fn render_json(r: &TestReport) -> String {
    let doc = JsonReport {
        suite: &r.suite_name,
        started_at: r.started_at.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        totals: JsonTotals {
            passed: r.totals.passed,
            failed: r.totals.failed,
            errored: r.totals.errored,
        },
        warnings: &r.warnings,
        cases: r.cases.iter().map(json_case).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            c if (c as u32) < 0x20 && c != '\t' => {}
            c => out.push(c),
        }
    }
    out
}

fn render_junit(r: &TestReport) -> String {
    let total_time: f64 = r.cases.iter().map(|c| c.duration.as_secs_f64()).sum();
    let suite = xml_escape(&r.suite_name);
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let counts = format!(
        "tests=\"{}\" failures=\"{}\" errors=\"{}\"",
        r.cases.len(),
        r.totals.failed,
        r.totals.errored
    );
    let _ = writeln!(out, "<testsuites name=\"aspunit\" {counts} time=\"{total_time:.3}\">");
    let _ = writeln!(
        out,
        "  <testsuite name=\"{suite}\" {counts} time=\"{total_time:.3}\" timestamp=\"{}\">",
        r.started_at.format("%Y-%m-%dT%H:%M:%S")
    );
    for c in &r.cases {
        let _ = write!(
            out,
            "    <testcase name=\"{}\" classname=\"{suite}\" time=\"{:.3}\"",
            xml_escape(&c.name),
            c.duration.as_secs_f64()
        );
        let bad: Vec<_> = c.assertions.iter().filter(|a| a.status != Status::Pass).collect();
        if bad.is_empty() && c.warnings.is_empty() {
            out.push_str("/>\n");
            continue;
        }
        out.push_str(">\n");
        for a in bad {
            let element = if a.status == Status::Fail { "failure" } else { "error" };
            let mut body = a.detail.clone();
            for (i, m) in a.witnesses.iter().zip(&a.witness_models) {
                let _ = write!(body, "\nanswer set #{i}: {m}");
            }
            let message = if a.assertion.is_empty() {
                a.detail.clone()
            } else {
                format!("{}: {}", a.assertion, a.detail)
            };
            let _ = writeln!(
                out,
                "      <{element} message=\"{}\" type=\"{}\">{}</{element}>",
                xml_escape(&message),
                xml_escape(&a.kind),
                xml_escape(&body)
            );
        }
        if !c.warnings.is_empty() {
            let _ = writeln!(out, "      <system-out>{}</system-out>", xml_escape(&c.warnings.join("\n")));
        }
        out.push_str("    </testcase>\n");
    }
    out.push_str("  </testsuite>\n</testsuites>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::{AssertionReport, ProgramStats};
    use aspunit_core::testlang::Mode;
    use chrono::TimeZone;
    use std::time::Duration;

    fn case(name: &str, statuses: &[Status]) -> CaseReport {
        CaseReport {
            name: name.into(),
            mode: Mode::WholeProgram,
            warnings: vec![],
            assertions: statuses
                .iter()
                .map(|&s| AssertionReport {
                    kind: "assertTrue".into(),
                    assertion: "assertTrue(\"a.\")".into(),
                    status: s,
                    detail: "`a` in 0 of 1 answer sets <x & y>".into(),
                    witnesses: if s == Status::Fail { vec![0] } else { vec![] },
                    witness_models: if s == Status::Fail { vec!["{b}".into()] } else { vec![] },
                })
                .collect(),
            stats: Some(ProgramStats {
                rules: 2,
                answer_sets: 1,
                complete: true,
            }),
            transcript: None,
            duration: Duration::from_millis(5),
        }
    }

    fn report(cases: Vec<CaseReport>) -> TestReport {
        let t = chrono::Utc.with_ymd_and_hms(2024, 1, 2, 3, 4, 5).unwrap();
        TestReport::new("s".into(), cases, vec![], t)
    }

    #[test]
    fn text_summary() {
        let r = report(vec![case("a", &[Status::Pass]), case("b", &[Status::Pass, Status::Fail])]);
        let text = render_report(&r, Format::Text);
        assert!(text.ends_with("1 passed, 1 failed, 0 errors\n"), "{text}");
        assert!(text.contains("FAIL b [PROGRAM]"));
        assert!(text.contains("answer set #0: {b}"));
    }

    #[test]
    fn json_schema_keys() {
        let r = report(vec![case("a", &[Status::Error])]);
        let v: serde_json::Value = serde_json::from_str(&render_report(&r, Format::Json)).unwrap();
        assert_eq!(v["suite"], "s");
        assert_eq!(v["totals"]["errored"], 1);
        let c = &v["cases"][0];
        assert_eq!(c["mode"], "PROGRAM");
        assert_eq!(c["durationMs"], 5);
        assert_eq!(c["assertions"][0]["status"], "error");
        assert!(c["assertions"][0]["witnesses"].is_array());
    }

    #[test]
    fn junit_escapes_and_counts() {
        let r = report(vec![case("a<1>", &[Status::Fail]), case("b", &[Status::Error])]);
        let xml = render_report(&r, Format::Junit);
        assert!(xml.contains("tests=\"2\" failures=\"1\" errors=\"1\""));
        assert!(xml.contains("name=\"a&lt;1&gt;\""));
        assert!(xml.contains("&lt;x &amp; y&gt;"));
        assert_eq!(xml.matches("<failure ").count(), 1);
        assert_eq!(xml.matches("<error ").count(), 1);
    }

    #[test]
    fn format_names() {
        assert_eq!("junit".parse::<Format>(), Ok(Format::Junit));
        assert_eq!("xunit-xml".parse::<Format>(), Ok(Format::Junit));
        assert!("html".parse::<Format>().is_err());
    }
}
