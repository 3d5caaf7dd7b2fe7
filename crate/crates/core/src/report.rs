//! Rendering of assessments, trends and decompositions.
//!
//! Scores print with two decimals and percentages with one. Output is a
//! pure function of its input: no clocks, no hash-ordered maps.

use std::fmt::Write;

use serde::Serialize;

use crate::analysis::{self, rank_contributions, AnalysisError, TrendTable};
use crate::model::{CompositeAssessment, DeltaDecomposition, ToolKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(Format::Markdown),
            "json" => Ok(Format::Json),
            "text" | "txt" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (markdown, json, text)")),
        }
    }
}

pub fn score(v: f64) -> String {
    format!("{v:.2}")
}

/// Signed with two decimals; zero prints unsigned.
pub fn signed(v: f64) -> String {
    let s = format!("{v:+.2}");
    if s == "+0.00" || s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub fn percent(fraction: f64) -> String {
    format!("{:.1}%", fraction * 100.0)
}

/// Endpoint change for a report row: relative percent for compliance
/// scores and the composite, absolute points otherwise (and whenever the
/// starting value is zero).
pub fn change(tool: Option<ToolKind>, first: f64, last: f64) -> String {
    let relative = tool.is_none_or(ToolKind::is_compliance);
    if relative && first > 0.0 {
        let pct = format!("{:+.1}%", (last - first) / first * 100.0);
        if pct == "+0.0%" || pct == "-0.0%" {
            "0.0%".into()
        } else {
            pct
        }
    } else {
        let pts = format!("{:+.1} pts", last - first);
        if pts.starts_with("+0.0 ") || pts.starts_with("-0.0 ") {
            "0.0 pts".into()
        } else {
            pts
        }
    }
}

/// Everything a report can show about a sequence of assessments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub assessments: Vec<CompositeAssessment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trend: Option<TrendTable>,
    /// First to last assessment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DeltaDecomposition>,
}

impl Report {
    pub fn build(assessments: Vec<CompositeAssessment>) -> Result<Report, AnalysisError> {
        let (trend, decomposition) = if assessments.len() >= 2 {
            (
                Some(analysis::trend_series(&assessments)?),
                Some(analysis::decompose_delta(
                    &assessments[0],
                    &assessments[assessments.len() - 1],
                )?),
            )
        } else {
            (None, None)
        };
        Ok(Report {
            assessments,
            trend,
            decomposition,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Markdown => self.markdown(),
            Format::Json => {
                let mut s = if self.assessments.len() == 1 {
                    serde_json::to_string_pretty(&self.assessments[0])
                } else {
                    serde_json::to_string_pretty(self)
                }
                .expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.text(),
        }
    }

    fn rows(&self) -> Vec<(String, Vec<f64>, Option<ToolKind>)> {
        let mut rows: Vec<_> = ToolKind::ALL
            .into_iter()
            .map(|t| {
                (
                    t.display_name().to_string(),
                    self.assessments.iter().map(|a| a.score(t)).collect(),
                    Some(t),
                )
            })
            .collect();
        rows.push((
            "UCA".into(),
            self.assessments.iter().map(|a| a.composite).collect(),
            None,
        ));
        rows
    }

    fn markdown(&self) -> String {
        let multi = self.assessments.len() >= 2;
        let mut out = String::from("# Security Assessment Report\n\n");

        out.push_str("| Tool |");
        for a in &self.assessments {
            let _ = write!(out, " {} |", a.label);
        }
        if multi {
            out.push_str(" Change |");
        }
        out.push_str("\n|---|");
        for _ in &self.assessments {
            out.push_str("---:|");
        }
        if multi {
            out.push_str("---:|");
        }
        out.push('\n');

        for (name, values, tool) in self.rows() {
            let bold = |s: String| {
                if tool.is_none() {
                    format!("**{s}**")
                } else {
                    s
                }
            };
            let _ = write!(out, "| {} |", bold(name));
            for v in &values {
                let _ = write!(out, " {} |", bold(score(*v)));
            }
            if multi {
                let c = change(tool, values[0], values[values.len() - 1]);
                let _ = write!(out, " {} |", bold(c));
            }
            out.push('\n');
        }

        if let Some(trend) = &self.trend {
            out.push_str("\n## Trends\n\n| Tool | Direction |\n|---|---|\n");
            for (t, series) in &trend.tools {
                let _ = writeln!(
                    out,
                    "| {} | {} |",
                    t.display_name(),
                    series.direction.as_str()
                );
            }
            let _ = writeln!(out, "| UCA | {} |", trend.composite.direction.as_str());
        }

        if let Some(d) = &self.decomposition {
            let _ = writeln!(
                out,
                "\n## Change decomposition ({} to {})\n\n| Tool | Weighted change | Share |\n|---|---:|---:|",
                d.from_label, d.to_label
            );
            for r in rank_contributions(d) {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} |",
                    r.tool.display_name(),
                    signed(r.delta),
                    r.share.map_or("-".into(), percent)
                );
            }
            let _ = writeln!(out, "| **Total** | **{}** | |", signed(d.total_delta));
            let _ = writeln!(out, "\n{}", dominant_line(d));
        }
        out
    }

    fn text(&self) -> String {
        let multi = self.assessments.len() >= 2;
        let mut out = String::new();
        let _ = write!(out, "{:<18}", "Tool");
        for a in &self.assessments {
            let _ = write!(out, " {:>10}", a.label);
        }
        if multi {
            let _ = write!(out, " {:>10}", "Change");
        }
        out.push('\n');
        for (name, values, tool) in self.rows() {
            let _ = write!(out, "{name:<18}");
            for v in &values {
                let _ = write!(out, " {:>10}", score(*v));
            }
            if multi {
                let _ = write!(
                    out,
                    " {:>10}",
                    change(tool, values[0], values[values.len() - 1])
                );
            }
            out.push('\n');
        }
        if let Some(trend) = &self.trend {
            out.push_str("\nTrends:");
            for (t, s) in &trend.tools {
                let _ = write!(out, " {}={}", t, s.direction.as_str());
            }
            let _ = writeln!(out, " UCA={}", trend.composite.direction.as_str());
        }
        if let Some(d) = &self.decomposition {
            out.push('\n');
            out.push_str(&decomposition_text(d));
        }
        out
    }
}

pub fn dominant_line(d: &DeltaDecomposition) -> String {
    match (d.dominant_tool, d.dominant_share) {
        (Some(t), Some(share)) => format!(
            "dominant: {} {} ({})",
            t,
            signed(d.per_tool_delta[&t]),
            percent(share)
        ),
        (Some(t), None) => format!("dominant: {} {}", t, signed(d.per_tool_delta[&t])),
        _ => "dominant: none".into(),
    }
}

/// Ranked per-tool deltas, total and dominant driver as plain text.
pub fn decomposition_text(d: &DeltaDecomposition) -> String {
    let mut out = format!(
        "{} -> {}: total delta {}\n",
        d.from_label,
        d.to_label,
        signed(d.total_delta)
    );
    for r in rank_contributions(d) {
        let _ = writeln!(
            out,
            "  {:<18} {:>8} {:>7}",
            r.tool.as_str(),
            signed(r.delta),
            r.share.map_or("-".into(), percent)
        );
    }
    let _ = writeln!(out, "{}", dominant_line(d));
    out
}

/// Per-tool scores, weighted contributions and composite as plain text.
pub fn assessment_text(a: &CompositeAssessment) -> String {
    let mut out = format!("assessment: {}\n", a.label);
    let _ = writeln!(
        out,
        "  {:<18} {:>7} {:>7} {:>13}",
        "tool", "score", "weight", "contribution"
    );
    for t in ToolKind::ALL {
        let _ = writeln!(
            out,
            "  {:<18} {:>7} {:>7} {:>13}",
            t.as_str(),
            score(a.score(t)),
            format!("{:.2}", a.weights.weight(t)),
            score(a.contributions.get(&t).copied().unwrap_or_default())
        );
    }
    let _ = writeln!(out, "composite: {}", score(a.composite));
    out
}
