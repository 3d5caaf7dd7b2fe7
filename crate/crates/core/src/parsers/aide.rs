//! AIDE `--check` text report.

use std::sync::LazyLock;

use regex::Regex;

use super::{ParseDiagnostics, ParseError, Parsed};
use crate::model::{AideReport, ToolKind};

static SUMMARY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?im)^\s*(added|removed|changed) entries:\s*(\d+)").unwrap());

static NO_CHANGES: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)AIDE found NO differences between database and filesystem|All files match AIDE database")
        .unwrap()
});

pub fn parse_aide(report_text: &str) -> Result<Parsed<AideReport>, ParseError> {
    let mut diag = ParseDiagnostics::new(ToolKind::Aide);
    let mut counts: [Option<u64>; 3] = [None; 3];
    const NAMES: [&str; 3] = ["Added", "Removed", "Changed"];

    for cap in SUMMARY.captures_iter(report_text) {
        let whole = cap.get(0).unwrap();
        let line = line_of(report_text, whole.start());
        let slot = match cap[1].to_ascii_lowercase().as_str() {
            "added" => 0,
            "removed" => 1,
            _ => 2,
        };
        let Ok(value) = cap[2].parse::<u64>() else {
            diag.warn(format!("line {line}: count {} overflows", &cap[2]));
            continue;
        };
        if counts[slot].is_some() {
            diag.warn(format!(
                "line {line}: duplicate {} entries line ignored",
                NAMES[slot]
            ));
            continue;
        }
        diag.trace(format!("line {line}: {} entries: {value}", NAMES[slot]));
        counts[slot] = Some(value);
    }

    let report = match counts {
        [Some(added), Some(removed), Some(changed)] => AideReport {
            added,
            removed,
            changed,
        },
        _ => {
            if let Some(m) = NO_CHANGES.find(report_text) {
                let line = line_of(report_text, m.start());
                diag.trace(format!("line {line}: no-change report, all counts 0"));
                if counts.iter().any(Option::is_some) {
                    diag.warn("partial summary ignored in favour of the no-change marker");
                }
                AideReport {
                    added: 0,
                    removed: 0,
                    changed: 0,
                }
            } else {
                let missing: Vec<_> = NAMES
                    .iter()
                    .zip(counts)
                    .filter(|(_, c)| c.is_none())
                    .map(|(n, _)| format!("`{n} entries`"))
                    .collect();
                return Err(ParseError::SummaryMissing(format!(
                    "no {} line and no no-change marker",
                    missing.join(", ")
                )));
            }
        }
    };

    Ok(Parsed {
        report,
        diagnostics: diag,
    })
}

pub(crate) fn line_of(text: &str, byte_offset: usize) -> usize {
    text[..byte_offset].matches('\n').count() + 1
}
