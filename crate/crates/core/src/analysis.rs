//! Comparison of assessments taken at different hardening levels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{CompositeAssessment, DeltaDecomposition, ToolKind};

/// Scores whose endpoints differ by at most this much are classified flat.
pub const FLAT_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("WEIGHT_MISMATCH: `{from}` and `{to}` were scored with different tool weights")]
    WeightMismatch { from: String, to: String },
    #[error("TOO_FEW_ASSESSMENTS: trend needs at least 2 assessments, got {0}")]
    TooFewAssessments(usize),
}

impl AnalysisError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::WeightMismatch { .. } => "WEIGHT_MISMATCH",
            AnalysisError::TooFewAssessments(_) => "TOO_FEW_ASSESSMENTS",
        }
    }
}

fn check_weights(a: &CompositeAssessment, b: &CompositeAssessment) -> Result<(), AnalysisError> {
    if a.weights.same_tool_weights(&b.weights) {
        Ok(())
    } else {
        Err(AnalysisError::WeightMismatch {
            from: a.label.clone(),
            to: b.label.clone(),
        })
    }
}

/// Splits the composite change between two assessments into weighted
/// per-tool changes.
pub fn decompose_delta(
    from: &CompositeAssessment,
    to: &CompositeAssessment,
) -> Result<DeltaDecomposition, AnalysisError> {
    check_weights(from, to)?;
    let per_tool_delta: BTreeMap<ToolKind, f64> = ToolKind::ALL
        .into_iter()
        .map(|t| (t, to.weights.weight(t) * (to.score(t) - from.score(t))))
        .collect();
    let total_delta: f64 = per_tool_delta.values().sum();

    // Strict comparison keeps the earliest tool on ties.
    let mut dominant: Option<(ToolKind, f64)> = None;
    for (&t, &d) in &per_tool_delta {
        if d != 0.0 && dominant.is_none_or(|(_, best)| d.abs() > best.abs()) {
            dominant = Some((t, d));
        }
    }
    let dominant_share = match dominant {
        Some((_, d)) if total_delta != 0.0 => Some(d / total_delta),
        _ => None,
    };

    Ok(DeltaDecomposition {
        from_label: from.label.clone(),
        to_label: to.label.clone(),
        per_tool_delta,
        total_delta,
        dominant_tool: dominant.map(|(t, _)| t),
        dominant_share,
    })
}

/// One row of a ranked decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedContribution {
    pub tool: ToolKind,
    pub delta: f64,
    pub share: Option<f64>,
}

/// Per-tool deltas sorted by descending signed value, ties in tool order.
pub fn rank_contributions(decomp: &DeltaDecomposition) -> Vec<RankedContribution> {
    let total = decomp.total_delta;
    let mut rows: Vec<RankedContribution> = decomp
        .per_tool_delta
        .iter()
        .map(|(&tool, &delta)| RankedContribution {
            tool,
            delta,
            share: (total != 0.0).then(|| delta / total),
        })
        .collect();
    // Stable sort over rows already in declaration order.
    rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Up,
    Down,
    Flat,
}

impl Direction {
    /// Classifies by endpoints only.
    pub fn between(first: f64, last: f64) -> Direction {
        if (last - first).abs() <= FLAT_BAND {
            Direction::Flat
        } else if last > first {
            Direction::Up
        } else {
            Direction::Down
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "UP",
            Direction::Down => "DOWN",
            Direction::Flat => "FLAT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub values: Vec<f64>,
    pub direction: Direction,
}

impl Series {
    fn new(values: Vec<f64>) -> Self {
        let direction = Direction::between(values[0], values[values.len() - 1]);
        Series { values, direction }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendTable {
    pub labels: Vec<String>,
    pub tools: BTreeMap<ToolKind, Series>,
    pub composite: Series,
}

pub fn trend_series(assessments: &[CompositeAssessment]) -> Result<TrendTable, AnalysisError> {
    if assessments.len() < 2 {
        return Err(AnalysisError::TooFewAssessments(assessments.len()));
    }
    for pair in assessments.windows(2) {
        check_weights(&pair[0], &pair[1])?;
    }
    let tools = ToolKind::ALL
        .into_iter()
        .map(|t| {
            (
                t,
                Series::new(assessments.iter().map(|a| a.score(t)).collect()),
            )
        })
        .collect();
    Ok(TrendTable {
        labels: assessments.iter().map(|a| a.label.clone()).collect(),
        tools,
        composite: Series::new(assessments.iter().map(|a| a.composite).collect()),
    })
}
