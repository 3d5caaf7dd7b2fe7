//! Lynis `report-data` format: one `key=value` per line, `#` comments.

use super::{ParseDiagnostics, ParseError, Parsed};
use crate::model::{LynisReport, ToolKind};

const KEY: &str = "hardening_index";

pub fn parse_lynis(report_text: &str) -> Result<Parsed<LynisReport>, ParseError> {
    let mut diag = ParseDiagnostics::new(ToolKind::Lynis);
    let mut found: Option<(usize, &str)> = None;

    for (idx, raw) in report_text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            diag.warn(format!("line {line_no}: not a key=value pair"));
            continue;
        };
        if key.trim() != KEY {
            continue;
        }
        match found {
            None => found = Some((line_no, value.trim())),
            Some((first, _)) => diag.warn(format!(
                "line {line_no}: duplicate {KEY} ignored (first seen on line {first})"
            )),
        }
    }

    let (line, value) = found.ok_or(ParseError::KeyMissing { key: KEY })?;
    let parsed: i64 = value.parse().map_err(|_| ParseError::ValueNotInteger {
        key: KEY,
        value: value.to_string(),
        line,
    })?;
    if !(0..=100).contains(&parsed) {
        return Err(ParseError::ValueOutOfRange {
            key: KEY,
            value: parsed,
            line,
        });
    }
    diag.trace(format!("line {line}: {KEY}={parsed}"));

    Ok(Parsed {
        report: LynisReport {
            hardening_index: parsed as u8,
        },
        diagnostics: diag,
    })
}
