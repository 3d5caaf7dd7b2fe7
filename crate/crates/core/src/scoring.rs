//! Normalization of raw tool metrics to a 0-100 score, and weighted
//! aggregation of the six scores into a composite.
//!
//! | tool       | score                                              |
//! |------------|----------------------------------------------------|
//! | Lynis      | hardening index                                    |
//! | OpenSCAP   | `100 * pass / (pass + fail)`                       |
//! | AIDE       | `max(0, 100 - 10 * log10(added + removed + changed))`, 100 when clean |
//! | Tripwire   | `100 * (objects - violations) / objects`           |
//! | Vuln scan  | `max(0, 100 - penalty)`, see [`vuln_penalty`]      |
//!
//! Values are kept at full precision; rounding is left to rendering.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::model::{
    AideReport, CompositeAssessment, LynisReport, NormalizedScore, RawToolReport, ScapReport,
    Severity, ToolKind, TripwireReport, VulnReport, WeightError, WeightProfile,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("EMPTY_RESULT: no pass or fail results, SCAP score is undefined")]
    EmptyResult,
    #[error("EMPTY_DATABASE: Tripwire scanned 0 objects")]
    EmptyDatabase,
    #[error("CVSS_OUT_OF_RANGE: {0} is outside 0.0-10.0")]
    CvssOutOfRange(f64),
    #[error("TOOL_MISSING: no score for {}", .0.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", "))]
    ToolMissing(Vec<ToolKind>),
    #[error("TOOL_MISMATCH: score keyed as {key} belongs to {actual}")]
    ToolMismatch { key: ToolKind, actual: ToolKind },
    #[error(transparent)]
    Weights(#[from] WeightError),
}

impl ScoreError {
    pub fn code(&self) -> &'static str {
        match self {
            ScoreError::EmptyResult => "EMPTY_RESULT",
            ScoreError::EmptyDatabase => "EMPTY_DATABASE",
            ScoreError::CvssOutOfRange(_) => "CVSS_OUT_OF_RANGE",
            ScoreError::ToolMissing(_) => "TOOL_MISSING",
            ScoreError::ToolMismatch { .. } => "TOOL_MISMATCH",
            ScoreError::Weights(e) => e.code(),
        }
    }
}

fn score(tool: ToolKind, value: f64, raw: RawToolReport) -> NormalizedScore {
    NormalizedScore {
        tool,
        value: value.clamp(0.0, 100.0),
        raw: Some(raw),
    }
}

pub fn normalize_lynis(report: &LynisReport) -> NormalizedScore {
    score(
        ToolKind::Lynis,
        f64::from(report.hardening_index),
        RawToolReport::Lynis(*report),
    )
}

pub fn normalize_scap(report: &ScapReport) -> Result<NormalizedScore, ScoreError> {
    let total = report.pass_count + report.fail_count;
    if total == 0 {
        return Err(ScoreError::EmptyResult);
    }
    let value = 100.0 * report.pass_count as f64 / total as f64;
    Ok(score(
        report.profile.tool(),
        value,
        RawToolReport::Scap(*report),
    ))
}

/// Logarithmic file-change score. A report with no changes scores 100,
/// which agrees with the formula at one change.
pub fn aide_score(total_changes: u64) -> f64 {
    if total_changes == 0 {
        return 100.0;
    }
    (100.0 - 10.0 * (total_changes as f64).log10()).max(0.0)
}

pub fn normalize_aide(report: &AideReport) -> NormalizedScore {
    score(
        ToolKind::Aide,
        aide_score(report.total()),
        RawToolReport::Aide(*report),
    )
}

pub fn normalize_tripwire(report: &TripwireReport) -> Result<NormalizedScore, ScoreError> {
    if report.objects_scanned == 0 {
        return Err(ScoreError::EmptyDatabase);
    }
    let objects = report.objects_scanned as f64;
    // Saturating: parsers reject violations > objects, hand-built reports may not.
    let clean = report.objects_scanned.saturating_sub(report.violations) as f64;
    Ok(score(
        ToolKind::Tripwire,
        100.0 * clean / objects,
        RawToolReport::Tripwire(*report),
    ))
}

/// CVSS v3 qualitative rating band.
pub fn classify_severity(cvss: f64) -> Result<Severity, ScoreError> {
    if !(0.0..=10.0).contains(&cvss) {
        return Err(ScoreError::CvssOutOfRange(cvss));
    }
    Ok(if cvss >= 9.0 {
        Severity::Critical
    } else if cvss >= 7.0 {
        Severity::High
    } else if cvss >= 4.0 {
        Severity::Medium
    } else {
        Severity::Low
    })
}

/// Penalty before and after the firewall discount.
///
/// Unconfirmed findings are weighted by severity; confirmed findings carry
/// only the confirmed-vulnerability penalty. The discount never takes the
/// penalty below zero.
pub fn vuln_penalty(report: &VulnReport, profile: &WeightProfile) -> (f64, f64) {
    let severity: f64 = Severity::ALL
        .iter()
        .map(|&s| profile.severity_weight(s) * report.unconfirmed_at(s) as f64)
        .sum();
    let raw = severity
        + profile.port_penalty * report.open_ports as f64
        + profile.confirmed_penalty * report.confirmed_count as f64;
    let effective = if report.firewall_active {
        (raw - profile.firewall_discount).max(0.0)
    } else {
        raw
    };
    (raw, effective)
}

pub fn normalize_vuln(report: &VulnReport, profile: &WeightProfile) -> NormalizedScore {
    let (_, penalty) = vuln_penalty(report, profile);
    score(
        ToolKind::VulnScan,
        (100.0 - penalty).max(0.0),
        RawToolReport::Vuln(report.clone()),
    )
}

/// Dispatches to the normalizer for the report's tool.
pub fn normalize(
    raw: &RawToolReport,
    profile: &WeightProfile,
) -> Result<NormalizedScore, ScoreError> {
    match raw {
        RawToolReport::Lynis(r) => Ok(normalize_lynis(r)),
        RawToolReport::Scap(r) => normalize_scap(r),
        RawToolReport::Aide(r) => Ok(normalize_aide(r)),
        RawToolReport::Tripwire(r) => normalize_tripwire(r),
        RawToolReport::Vuln(r) => Ok(normalize_vuln(r, profile)),
    }
}

/// Weighted composite of all six tool scores, timestamped now.
pub fn aggregate(
    scores: &BTreeMap<ToolKind, NormalizedScore>,
    profile: &WeightProfile,
    label: &str,
) -> Result<CompositeAssessment, ScoreError> {
    aggregate_at(scores, profile, label, Utc::now())
}

pub fn aggregate_at(
    scores: &BTreeMap<ToolKind, NormalizedScore>,
    profile: &WeightProfile,
    label: &str,
    timestamp: DateTime<Utc>,
) -> Result<CompositeAssessment, ScoreError> {
    profile.validate()?;
    let missing: Vec<ToolKind> = ToolKind::ALL
        .into_iter()
        .filter(|t| !scores.contains_key(t))
        .collect();
    if !missing.is_empty() {
        return Err(ScoreError::ToolMissing(missing));
    }
    for (&key, s) in scores {
        if s.tool != key {
            return Err(ScoreError::ToolMismatch {
                key,
                actual: s.tool,
            });
        }
    }

    let contributions: BTreeMap<ToolKind, f64> = scores
        .iter()
        .map(|(&t, s)| (t, profile.weight(t) * s.value))
        .collect();
    let composite = contributions.values().sum();

    Ok(CompositeAssessment {
        label: label.to_string(),
        timestamp,
        scores: scores.clone(),
        weights: profile.clone(),
        composite,
        contributions,
    })
}

/// Convenience for the common case of six literal scores in canonical order.
pub fn supplied_scores(values: [f64; 6]) -> BTreeMap<ToolKind, NormalizedScore> {
    ToolKind::ALL
        .into_iter()
        .zip(values)
        .map(|(t, v)| (t, NormalizedScore::supplied(t, v)))
        .collect()
}
