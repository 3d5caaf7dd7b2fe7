use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tool::{Severity, ToolKind};

/// Absolute tolerance on the tool-weight sum.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeightError {
    #[error("WEIGHT_SUM_INVALID: tool weights sum to {sum}, expected 1.00")]
    SumInvalid { sum: f64 },
    #[error("WEIGHT_NEGATIVE: {entry} is {value}")]
    Negative { entry: String, value: f64 },
    #[error("TOOL_MISSING: no weight for {0}")]
    ToolMissing(ToolKind),
}

impl WeightError {
    pub fn code(&self) -> &'static str {
        match self {
            WeightError::SumInvalid { .. } => "WEIGHT_SUM_INVALID",
            WeightError::Negative { .. } => "WEIGHT_NEGATIVE",
            WeightError::ToolMissing(_) => "TOOL_MISSING",
        }
    }
}

/// Tool weights for aggregation plus the vulnerability penalty model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub tool_weights: BTreeMap<ToolKind, f64>,
    pub severity_weights: BTreeMap<Severity, f64>,
    pub port_penalty: f64,
    pub confirmed_penalty: f64,
    pub firewall_discount: f64,
}

impl Default for WeightProfile {
    fn default() -> Self {
        WeightProfile {
            tool_weights: default_tool_weights(),
            severity_weights: default_severity_weights(),
            port_penalty: 3.0,
            confirmed_penalty: 10.0,
            firewall_discount: 10.0,
        }
    }
}

/// Multi-domain tools (Lynis, CIS) at 0.20, single-domain tools at 0.15.
pub fn default_tool_weights() -> BTreeMap<ToolKind, f64> {
    BTreeMap::from([
        (ToolKind::Lynis, 0.20),
        (ToolKind::OpenscapStandard, 0.15),
        (ToolKind::Aide, 0.15),
        (ToolKind::Tripwire, 0.15),
        (ToolKind::OpenscapCis, 0.20),
        (ToolKind::VulnScan, 0.15),
    ])
}

pub fn default_severity_weights() -> BTreeMap<Severity, f64> {
    BTreeMap::from([
        (Severity::Critical, 15.0),
        (Severity::High, 8.0),
        (Severity::Medium, 4.0),
        (Severity::Low, 1.0),
    ])
}

impl WeightProfile {
    /// Profile with the given tool weights and default penalty constants.
    pub fn with_tool_weights(tool_weights: BTreeMap<ToolKind, f64>) -> Self {
        WeightProfile {
            tool_weights,
            ..WeightProfile::default()
        }
    }

    pub fn weight(&self, tool: ToolKind) -> f64 {
        self.tool_weights.get(&tool).copied().unwrap_or(0.0)
    }

    pub fn severity_weight(&self, severity: Severity) -> f64 {
        self.severity_weights.get(&severity).copied().unwrap_or(0.0)
    }

    /// Checks presence, sign and sum of every entry.
    pub fn validate(&self) -> Result<(), WeightError> {
        for tool in ToolKind::ALL {
            if !self.tool_weights.contains_key(&tool) {
                return Err(WeightError::ToolMissing(tool));
            }
        }
        for (tool, &w) in &self.tool_weights {
            check_non_negative(tool.as_str(), w)?;
        }
        for (sev, &w) in &self.severity_weights {
            check_non_negative(&format!("severity weight {sev}"), w)?;
        }
        check_non_negative("port_penalty", self.port_penalty)?;
        check_non_negative("confirmed_penalty", self.confirmed_penalty)?;
        check_non_negative("firewall_discount", self.firewall_discount)?;

        let sum: f64 = self.tool_weights.values().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(WeightError::SumInvalid { sum });
        }
        Ok(())
    }

    /// True when both profiles assign the same tool weights within tolerance.
    pub fn same_tool_weights(&self, other: &WeightProfile) -> bool {
        ToolKind::ALL
            .iter()
            .all(|&t| (self.weight(t) - other.weight(t)).abs() <= WEIGHT_SUM_TOLERANCE)
    }
}

fn check_non_negative(entry: &str, value: f64) -> Result<(), WeightError> {
    // NaN is rejected here too.
    if value >= 0.0 {
        Ok(())
    } else {
        Err(WeightError::Negative {
            entry: entry.to_string(),
            value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_is_valid() {
        WeightProfile::default().validate().unwrap();
    }

    #[test]
    fn uniform_weights_are_valid() {
        let w = ToolKind::ALL.iter().map(|&t| (t, 1.0 / 6.0)).collect();
        WeightProfile::with_tool_weights(w).validate().unwrap();
    }

    #[test]
    fn rejects_sum_off_by_five_hundredths() {
        let mut p = WeightProfile::default();
        p.tool_weights.insert(ToolKind::Lynis, 0.25);
        match p.validate() {
            Err(WeightError::SumInvalid { sum }) => assert!((sum - 1.05).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_weight_naming_entry() {
        let mut p = WeightProfile::default();
        p.tool_weights.insert(ToolKind::Aide, -0.15);
        p.tool_weights.insert(ToolKind::Tripwire, 0.45);
        let err = p.validate().unwrap_err();
        assert_eq!(err.code(), "WEIGHT_NEGATIVE");
        assert!(err.to_string().contains("AIDE"));
    }

    #[test]
    fn rejects_negative_penalty() {
        let p = WeightProfile {
            firewall_discount: -1.0,
            ..WeightProfile::default()
        };
        assert_eq!(p.validate().unwrap_err().code(), "WEIGHT_NEGATIVE");
    }

    #[test]
    fn rejects_missing_tool() {
        let mut p = WeightProfile::default();
        p.tool_weights.remove(&ToolKind::VulnScan);
        assert_eq!(
            p.validate().unwrap_err(),
            WeightError::ToolMissing(ToolKind::VulnScan)
        );
    }

    #[test]
    fn tolerance_is_absolute_1e9() {
        let mut p = WeightProfile::default();
        p.tool_weights.insert(ToolKind::Lynis, 0.20 + 5e-10);
        p.validate().unwrap();
        p.tool_weights.insert(ToolKind::Lynis, 0.20 + 5e-9);
        assert!(p.validate().is_err());
    }
}
