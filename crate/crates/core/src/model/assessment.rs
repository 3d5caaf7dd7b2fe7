use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::report::NormalizedScore;
use super::tool::ToolKind;
use super::weights::WeightProfile;

/// A composite score over all six tools at one point in time.
///
/// `composite` is stored alongside the per-tool `contributions` it is the sum
/// of, so a stored record can be audited without recomputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeAssessment {
    pub label: String,
    pub timestamp: DateTime<Utc>,
    pub scores: BTreeMap<ToolKind, NormalizedScore>,
    pub weights: WeightProfile,
    pub composite: f64,
    pub contributions: BTreeMap<ToolKind, f64>,
}

impl CompositeAssessment {
    pub fn score(&self, tool: ToolKind) -> f64 {
        self.scores.get(&tool).map_or(0.0, |s| s.value)
    }
}

/// Weighted per-tool change between two assessments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaDecomposition {
    pub from_label: String,
    pub to_label: String,
    pub per_tool_delta: BTreeMap<ToolKind, f64>,
    pub total_delta: f64,
    /// Tool with the largest absolute weighted change; `None` when every
    /// delta is zero.
    pub dominant_tool: Option<ToolKind>,
    /// Dominant delta as a fraction of the total; `None` when the total is zero.
    pub dominant_share: Option<f64>,
}
