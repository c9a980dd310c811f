//! Test-run reports: plain lines, TAP version 14, or JSON.

use crate::metamodel::{Entry, SealedModel};
use crate::runtime::{TestOutcome, TestStatus};
use crate::span::SourceMap;
use serde::Serialize;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ReportFormat {
    #[default]
    Plain,
    Tap,
    Json,
}

/// `Qualifier.TestName`, where the qualifier is the executing class or,
/// for package tests, the owning package.
pub fn outcome_name(model: &SealedModel, outcome: &TestOutcome) -> String {
    let test = model.test(outcome.test);
    let qualifier = match outcome.executing_class {
        Some(class) => model.class(class).name.clone(),
        None => match model.entity(test.owner) {
            Entry::Package(p) => p.name.clone(),
            _ => String::from("?"),
        },
    };
    format!("{qualifier}.{}", test.name)
}

pub fn render(
    model: &SealedModel,
    outcomes: &[TestOutcome],
    format: ReportFormat,
    sources: &SourceMap,
    color: bool,
) -> String {
    match format {
        ReportFormat::Plain => render_plain(model, outcomes, color),
        ReportFormat::Tap => render_tap(model, outcomes, sources),
        ReportFormat::Json => render_json(model, outcomes, sources),
    }
}

fn render_plain(model: &SealedModel, outcomes: &[TestOutcome], color: bool) -> String {
    let mut out = String::new();
    let mut passed = 0usize;
    let mut failed = 0usize;
    let mut errored = 0usize;
    for outcome in outcomes {
        let (word, code) = match outcome.status {
            TestStatus::Pass => {
                passed += 1;
                ("PASS", "32")
            }
            TestStatus::Fail => {
                failed += 1;
                ("FAIL", "31")
            }
            TestStatus::RuntimeError => {
                errored += 1;
                ("ERROR", "31")
            }
        };
        let word = if color {
            format!("\x1b[{code}m{word}\x1b[0m")
        } else {
            word.to_string()
        };
        out.push_str(&format!("{word} {}\n", outcome_name(model, outcome)));
    }
    out.push_str(&format!(
        "{passed} passed, {failed} failed, {errored} errors\n"
    ));
    out
}

fn render_tap(model: &SealedModel, outcomes: &[TestOutcome], sources: &SourceMap) -> String {
    let mut out = String::from("TAP version 14\n");
    out.push_str(&format!("1..{}\n", outcomes.len()));
    for (i, outcome) in outcomes.iter().enumerate() {
        let n = i + 1;
        let name = outcome_name(model, outcome);
        match outcome.status {
            TestStatus::Pass => out.push_str(&format!("ok {n} - {name}\n")),
            TestStatus::Fail => {
                out.push_str(&format!("not ok {n} - {name}\n"));
                if let Some(span) = outcome.failed_assert {
                    out.push_str(&format!("# assert failed at {}\n", sources.display(span)));
                }
            }
            TestStatus::RuntimeError => {
                out.push_str(&format!("not ok {n} - {name}\n"));
                if let Some(err) = &outcome.error {
                    out.push_str(&format!(
                        "# {} at {}: {}\n",
                        err.kind.name(),
                        sources.display(err.span),
                        err.message
                    ));
                }
            }
        }
    }
    out
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonOutcome {
    unit: String,
    test: String,
    status: &'static str,
    output: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failed_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn render_json(model: &SealedModel, outcomes: &[TestOutcome], sources: &SourceMap) -> String {
    let rows: Vec<JsonOutcome> = outcomes
        .iter()
        .map(|outcome| {
            let test = model.test(outcome.test);
            let unit = match outcome.executing_class {
                Some(class) => model.class(class).name.clone(),
                None => match model.entity(test.owner) {
                    Entry::Package(p) => p.name.clone(),
                    _ => String::from("?"),
                },
            };
            JsonOutcome {
                unit,
                test: test.name.clone(),
                status: match outcome.status {
                    TestStatus::Pass => "pass",
                    TestStatus::Fail => "fail",
                    TestStatus::RuntimeError => "error",
                },
                output: outcome.output.clone(),
                failed_at: outcome.failed_assert.map(|s| sources.display(s)),
                error: outcome
                    .error
                    .as_ref()
                    .map(|e| format!("{}: {}", e.kind.name(), e.message)),
            }
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("report serialization");
    text.push('\n');
    text
}

/// Summary counts used for exit codes.
pub fn tally(outcomes: &[TestOutcome]) -> (usize, usize, usize) {
    let passed = outcomes
        .iter()
        .filter(|o| o.status == TestStatus::Pass)
        .count();
    let failed = outcomes
        .iter()
        .filter(|o| o.status == TestStatus::Fail)
        .count();
    let errored = outcomes
        .iter()
        .filter(|o| o.status == TestStatus::RuntimeError)
        .count();
    (passed, failed, errored)
}
