//! Tripwire `--check` text report.

use std::sync::LazyLock;

use regex::Regex;

use super::aide::line_of;
use super::{parse_count, ParseDiagnostics, ParseError, Parsed};
use crate::model::{ToolKind, TripwireReport};

static OBJECTS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?im)Total objects scanned:\s*([\d,]+)").unwrap());
static VIOLATIONS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?im)Total violations found:\s*([\d,]+)").unwrap());

fn extract(
    re: &Regex,
    what: &str,
    text: &str,
    diag: &mut ParseDiagnostics,
) -> Result<u64, ParseError> {
    let mut iter = re.captures_iter(text);
    let cap = iter
        .next()
        .ok_or_else(|| ParseError::SummaryMissing(format!("no `{what}` line")))?;
    let line = line_of(text, cap.get(0).unwrap().start());
    let value = parse_count(&cap[1]).ok_or_else(|| {
        ParseError::SummaryMissing(format!("line {line}: unreadable count {:?}", &cap[1]))
    })?;
    diag.trace(format!("line {line}: {what}: {value}"));
    for extra in iter {
        let l = line_of(text, extra.get(0).unwrap().start());
        diag.warn(format!("line {l}: duplicate `{what}` line ignored"));
    }
    Ok(value)
}

pub fn parse_tripwire(report_text: &str) -> Result<Parsed<TripwireReport>, ParseError> {
    let mut diag = ParseDiagnostics::new(ToolKind::Tripwire);
    let objects = extract(&OBJECTS, "Total objects scanned", report_text, &mut diag)?;
    let violations = extract(
        &VIOLATIONS,
        "Total violations found",
        report_text,
        &mut diag,
    )?;
    if violations > objects {
        return Err(ParseError::ViolationsExceedObjects {
            violations,
            objects,
        });
    }
    Ok(Parsed {
        report: TripwireReport {
            objects_scanned: objects,
            violations,
        },
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(objects: &str, violations: &str) -> String {
        format!(
            "Open Source Tripwire(R) 2.4.3.7 Integrity Check Report\n\n\
             Report generated by:          root\n\
             ===============================================================================\n\
             Report Summary:\n\
             ===============================================================================\n\n\
             Host name:                    node1\n\
             Total objects scanned:  {objects}\n\
             Total violations found:  {violations}\n"
        )
    }

    #[test]
    fn strips_thousands_separators() {
        let p = parse_tripwire(&report("76,000", "13,459")).unwrap();
        assert_eq!(
            p.report,
            TripwireReport {
                objects_scanned: 76000,
                violations: 13459
            }
        );
    }

    #[test]
    fn clean_system() {
        let p = parse_tripwire(&report("100", "0")).unwrap();
        assert_eq!(p.report.violations, 0);
        assert_eq!(p.report.objects_scanned, 100);
    }

    #[test]
    fn violations_exceeding_objects() {
        let err = parse_tripwire(&report("100", "200")).unwrap_err();
        assert_eq!(err.code(), "VIOLATIONS_EXCEED_OBJECTS");
    }

    #[test]
    fn missing_summary() {
        let err = parse_tripwire("Total objects scanned: 5\n").unwrap_err();
        assert_eq!(err.code(), "SUMMARY_MISSING");
        assert_eq!(
            parse_tripwire("nothing here").unwrap_err().code(),
            "SUMMARY_MISSING"
        );
    }
}
