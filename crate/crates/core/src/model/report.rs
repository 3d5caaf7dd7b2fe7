use serde::{Deserialize, Serialize};

use super::tool::{ScapProfile, Severity, ToolKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LynisReport {
    pub hardening_index: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScapReport {
    pub profile: ScapProfile,
    pub pass_count: u64,
    pub fail_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AideReport {
    pub added: u64,
    pub removed: u64,
    pub changed: u64,
}

impl AideReport {
    pub fn total(&self) -> u64 {
        self.added + self.removed + self.changed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripwireReport {
    pub objects_scanned: u64,
    pub violations: u64,
}

/// One vulnerability reported by a scanner script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnFinding {
    /// CVE identifier when one is present, otherwise the script id.
    pub identifier: String,
    pub cvss: Option<f64>,
    pub severity: Severity,
    pub confirmed: bool,
    pub port: Option<u16>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnReport {
    pub open_ports: u64,
    pub filtered_ports: u64,
    pub firewall_active: bool,
    pub findings: Vec<VulnFinding>,
    pub confirmed_count: u64,
}

impl VulnReport {
    /// Number of findings that are not confirmed, for the given severity.
    pub fn unconfirmed_at(&self, severity: Severity) -> u64 {
        self.findings
            .iter()
            .filter(|f| !f.confirmed && f.severity == severity)
            .count() as u64
    }
}

/// Raw metrics extracted from one tool's native report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RawToolReport {
    Lynis(LynisReport),
    Scap(ScapReport),
    Aide(AideReport),
    Tripwire(TripwireReport),
    Vuln(VulnReport),
}

impl RawToolReport {
    pub fn tool(&self) -> ToolKind {
        match self {
            RawToolReport::Lynis(_) => ToolKind::Lynis,
            RawToolReport::Scap(r) => r.profile.tool(),
            RawToolReport::Aide(_) => ToolKind::Aide,
            RawToolReport::Tripwire(_) => ToolKind::Tripwire,
            RawToolReport::Vuln(_) => ToolKind::VulnScan,
        }
    }
}

/// A tool's score on the common 0-100 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedScore {
    pub tool: ToolKind,
    pub value: f64,
    /// Metrics the value was derived from; `None` when the score was
    /// supplied directly (for tools scanned out-of-band).
    pub raw: Option<RawToolReport>,
}

impl NormalizedScore {
    /// A score supplied as a literal, clamped to [0, 100].
    pub fn supplied(tool: ToolKind, value: f64) -> Self {
        NormalizedScore {
            tool,
            value: value.clamp(0.0, 100.0),
            raw: None,
        }
    }
}
