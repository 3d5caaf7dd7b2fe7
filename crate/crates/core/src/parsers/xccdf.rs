//! XCCDF `TestResult` documents as written by `oscap xccdf eval --results`.

use std::collections::BTreeMap;

use roxmltree::{Document, Node, ParsingOptions};

use super::{LineIndex, ParseDiagnostics, ParseError, Parsed};
use crate::model::{ScapProfile, ScapReport};

/// Result values that count toward neither side of the ratio.
const EXCLUDED: [&str; 7] = [
    "notapplicable",
    "notchecked",
    "notselected",
    "informational",
    "unknown",
    "skipped",
    "missing",
];

pub(crate) fn parse_document(text: &str) -> Result<Document<'_>, ParseError> {
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    Ok(Document::parse_with_options(text, opts)?)
}

fn is(node: &Node, local: &str) -> bool {
    node.is_element() && node.tag_name().name() == local
}

pub fn parse_xccdf(
    result_xml: &str,
    profile: ScapProfile,
) -> Result<Parsed<ScapReport>, ParseError> {
    let doc = parse_document(result_xml)?;
    let mut diag = ParseDiagnostics::new(profile.tool());

    let test_results: Vec<Node> = doc.descendants().filter(|n| is(n, "TestResult")).collect();
    let scope = match test_results.as_slice() {
        [] => doc.root(),
        [only] => *only,
        [.., last] => {
            diag.warn(format!(
                "{} TestResult elements found; using the last ({})",
                test_results.len(),
                last.attribute("id").unwrap_or("unnamed")
            ));
            *last
        }
    };

    let lines = LineIndex::new(result_xml);
    let mut pass = 0u64;
    let mut fail = 0u64;
    let mut tallies: BTreeMap<String, u64> = BTreeMap::new();
    let mut seen = 0usize;

    for rr in scope.descendants().filter(|n| is(n, "rule-result")) {
        seen += 1;
        let row = lines.line(rr.range().start);
        let idref = rr.attribute("idref").unwrap_or("?");
        let Some(result) = rr.children().find(|c| is(c, "result")) else {
            diag.warn(format!(
                "line {}: rule-result {idref} has no result element",
                row
            ));
            continue;
        };
        let value = result.text().unwrap_or("").trim().to_ascii_lowercase();
        *tallies.entry(value.clone()).or_default() += 1;
        match value.as_str() {
            "pass" | "fixed" => pass += 1,
            "fail" | "error" => fail += 1,
            v if EXCLUDED.contains(&v) => {
                *diag.excluded.entry(value.clone()).or_default() += 1;
            }
            other => {
                diag.warn(format!(
                    "line {}: rule-result {idref} has unrecognised result {other:?}; excluded",
                    row
                ));
                *diag.excluded.entry(value.clone()).or_default() += 1;
            }
        }
        diag.trace(format!("line {row}: {idref} = {value}"));
    }

    if seen == 0 {
        return Err(ParseError::NoTestResult);
    }
    diag.trace(format!(
        "tallies {tallies:?} -> pass_count {pass}, fail_count {fail}"
    ));

    Ok(Parsed {
        report: ScapReport {
            profile,
            pass_count: pass,
            fail_count: fail,
        },
        diagnostics: diag,
    })
}
