//! Readers for each tool's native report format.
//!
//! Every parser is a pure function over the report text. A parse either
//! yields a complete [`RawToolReport`](crate::model::RawToolReport) variant
//! or fails; warnings collected along the way are informational only.

mod aide;
pub mod emit;
mod lynis;
mod nmap;
mod tripwire;
mod xccdf;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::model::{RawToolReport, ScapProfile, ToolKind};

pub use aide::parse_aide;
pub use lynis::parse_lynis;
pub use nmap::{detect_firewall, parse_nmap, parse_nmap_with, FIREWALL_FILTERED_THRESHOLD};
pub use tripwire::parse_tripwire;
pub use xccdf::parse_xccdf;

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("KEY_MISSING: no `{key}` entry found")]
    KeyMissing { key: &'static str },
    #[error("VALUE_OUT_OF_RANGE: line {line}: {key}={value} is outside 0-100")]
    ValueOutOfRange {
        key: &'static str,
        value: i64,
        line: usize,
    },
    #[error("VALUE_NOT_INTEGER: line {line}: {key}={value:?} is not an integer")]
    ValueNotInteger {
        key: &'static str,
        value: String,
        line: usize,
    },
    #[error("MALFORMED_XML: {0}")]
    MalformedXml(String),
    #[error("NO_TEST_RESULT: document contains no rule-result elements")]
    NoTestResult,
    #[error("SUMMARY_MISSING: {0}")]
    SummaryMissing(String),
    #[error("VIOLATIONS_EXCEED_OBJECTS: {violations} violations reported for {objects} objects")]
    ViolationsExceedObjects { violations: u64, objects: u64 },
    #[error("NO_HOST: scan output contains no host element")]
    NoHost,
    #[error("IO_FAILURE: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::KeyMissing { .. } => "KEY_MISSING",
            ParseError::ValueOutOfRange { .. } => "VALUE_OUT_OF_RANGE",
            ParseError::ValueNotInteger { .. } => "VALUE_NOT_INTEGER",
            ParseError::MalformedXml(_) => "MALFORMED_XML",
            ParseError::NoTestResult => "NO_TEST_RESULT",
            ParseError::SummaryMissing(_) => "SUMMARY_MISSING",
            ParseError::ViolationsExceedObjects { .. } => "VIOLATIONS_EXCEED_OBJECTS",
            ParseError::NoHost => "NO_HOST",
            ParseError::Io { .. } => "IO_FAILURE",
        }
    }
}

impl From<roxmltree::Error> for ParseError {
    fn from(e: roxmltree::Error) -> Self {
        ParseError::MalformedXml(e.to_string())
    }
}

/// Side information collected while parsing one report.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseDiagnostics {
    pub source_path: String,
    pub tool: Option<ToolKind>,
    /// Non-fatal oddities, each prefixed with its line or element.
    pub warnings: Vec<String>,
    /// Where each extracted number came from; shown at debug verbosity.
    pub provenance: Vec<String>,
    /// Counts of values deliberately left out of the metrics, by category.
    pub excluded: BTreeMap<String, u64>,
}

impl ParseDiagnostics {
    pub(crate) fn new(tool: ToolKind) -> Self {
        ParseDiagnostics {
            tool: Some(tool),
            ..Default::default()
        }
    }

    pub(crate) fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub(crate) fn trace(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::debug!("{msg}");
        self.provenance.push(msg);
    }

    pub fn with_source(mut self, path: impl Into<String>) -> Self {
        self.source_path = path.into();
        self
    }
}

/// A parser result together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub report: T,
    pub diagnostics: ParseDiagnostics,
}

/// Options that cannot be inferred from the report text alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub firewall_override: Option<bool>,
}

/// Reads a report as UTF-8 (lossily).
pub fn read_report(path: &Path) -> Result<String, ParseError> {
    let bytes = std::fs::read(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Parses `text` with the parser that belongs to `tool`.
pub fn parse_for_tool(
    tool: ToolKind,
    text: &str,
    options: ParseOptions,
) -> Result<Parsed<RawToolReport>, ParseError> {
    fn wrap<T>(p: Parsed<T>, f: impl FnOnce(T) -> RawToolReport) -> Parsed<RawToolReport> {
        Parsed {
            report: f(p.report),
            diagnostics: p.diagnostics,
        }
    }
    Ok(match tool {
        ToolKind::Lynis => wrap(parse_lynis(text)?, RawToolReport::Lynis),
        ToolKind::OpenscapStandard => wrap(
            parse_xccdf(text, ScapProfile::Standard)?,
            RawToolReport::Scap,
        ),
        ToolKind::OpenscapCis => wrap(parse_xccdf(text, ScapProfile::Cis)?, RawToolReport::Scap),
        ToolKind::Aide => wrap(parse_aide(text)?, RawToolReport::Aide),
        ToolKind::Tripwire => wrap(parse_tripwire(text)?, RawToolReport::Tripwire),
        ToolKind::VulnScan => wrap(
            parse_nmap_with(text, options.firewall_override)?,
            RawToolReport::Vuln,
        ),
    })
}

/// Reads and parses a report file for `tool`.
pub fn parse_file(
    tool: ToolKind,
    path: &Path,
    options: ParseOptions,
) -> Result<Parsed<RawToolReport>, ParseError> {
    let text = read_report(path)?;
    let mut parsed = parse_for_tool(tool, &text, options)?;
    parsed.diagnostics.source_path = path.display().to_string();
    Ok(parsed)
}

/// Maps byte offsets to 1-based line numbers.
pub(crate) struct LineIndex(Vec<usize>);

impl LineIndex {
    pub(crate) fn new(text: &str) -> Self {
        LineIndex(text.match_indices('\n').map(|(i, _)| i).collect())
    }

    pub(crate) fn line(&self, offset: usize) -> u32 {
        (self.0.partition_point(|&nl| nl < offset) + 1) as u32
    }
}

/// Parses a thousands-separated count such as `76,000`.
pub(crate) fn parse_count(s: &str) -> Option<u64> {
    let digits: String = s.chars().filter(|c| *c != ',').collect();
    digits.parse().ok()
}
