//! JUnit-XML report parsing.

use std::collections::BTreeSet;

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
    Skipped,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        matches!(self, Verdict::Fail | Verdict::Error)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestResult {
    /// `classname.name`, or just `name` when the report has no class name.
    pub id: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("malformed XML at byte {position}: {message}")]
    Malformed { position: u64, message: String },
    #[error("no <testsuite> or <testsuites> root element")]
    NotAReport,
    #[error("duplicate test case {0}")]
    Duplicate(String),
}

fn attr(e: &BytesStart<'_>, name: &str) -> Result<Option<String>, ReportError> {
    for a in e.attributes() {
        let a = a.map_err(|err| ReportError::Malformed { position: 0, message: err.to_string() })?;
        if a.key.local_name().as_ref() == name {
            let v = a
                .normalized_value(XmlVersion::Implicit1_0)
                .map_err(|err| ReportError::Malformed { position: 0, message: err.to_string() })?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn test_id(e: &BytesStart<'_>) -> Result<String, ReportError> {
    let name = attr(e, "name")?.unwrap_or_default();
    Ok(match attr(e, "classname")? {
        Some(class) if !class.is_empty() => format!("{class}.{name}"),
        _ => name,
    })
}

/// Parse one JUnit-XML report: one result per `testcase` element, in
/// document order. A `failure` child marks a failure, `error` an error and
/// `skipped` a skip; anything else inside a test case is ignored.
pub fn parse_test_report(bytes: &[u8]) -> Result<Vec<TestResult>, ReportError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| ReportError::Malformed { position: e.valid_up_to() as u64, message: "invalid UTF-8".into() })?;
    let mut reader = Reader::from_str(text);
    reader.config_mut().check_end_names = true;

    let mut results: Vec<TestResult> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut saw_suite = false;
    let mut depth = 0usize;
    // Depth of the open <testcase>, if any.
    let mut open_case: Option<usize> = None;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| ReportError::Malformed { position: reader.error_position(), message: e.to_string() })?;
        let (start, empty) = match &event {
            Event::Start(e) => (Some(e), false),
            Event::Empty(e) => (Some(e), true),
            Event::End(_) => {
                depth = depth.saturating_sub(1);
                if open_case == Some(depth) {
                    open_case = None;
                }
                continue;
            }
            Event::Eof if depth > 0 => {
                return Err(ReportError::Malformed {
                    position: reader.buffer_position(),
                    message: "unexpected end of document".into(),
                })
            }
            Event::Eof => break,
            _ => continue,
        };
        let e = start.expect("start or empty element");
        match e.local_name().as_ref() {
            "testsuite" | "testsuites" => saw_suite = true,
            "testcase" if open_case.is_none() => {
                let id = test_id(e)?;
                if !seen.insert(id.clone()) {
                    return Err(ReportError::Duplicate(id));
                }
                results.push(TestResult { id, verdict: Verdict::Pass });
                if !empty {
                    open_case = Some(depth);
                }
            }
            tag if open_case.is_some() => {
                let last = results.last_mut().expect("open test case");
                let verdict = match tag {
                    "failure" => Some(Verdict::Fail),
                    "error" => Some(Verdict::Error),
                    "skipped" => Some(Verdict::Skipped),
                    _ => None,
                };
                // A failure outranks an error, which outranks a skip.
                if let Some(v) = verdict {
                    let rank = |v: Verdict| match v {
                        Verdict::Pass => 0,
                        Verdict::Skipped => 1,
                        Verdict::Error => 2,
                        Verdict::Fail => 3,
                    };
                    if rank(v) > rank(last.verdict) {
                        last.verdict = v;
                    }
                }
            }
            _ => {}
        }
        if !empty {
            depth += 1;
        }
    }
    if !saw_suite {
        return Err(ReportError::NotAReport);
    }
    Ok(results)
}
