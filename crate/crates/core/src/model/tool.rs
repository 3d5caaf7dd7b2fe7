use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six assessment tools whose scores feed the composite.
///
/// Declaration order is significant: it is the canonical ordering used for
/// maps, report rows and every tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ToolKind {
    #[serde(alias = "lynis")]
    Lynis,
    #[serde(alias = "openscap_standard")]
    OpenscapStandard,
    #[serde(alias = "aide")]
    Aide,
    #[serde(alias = "tripwire")]
    Tripwire,
    #[serde(alias = "openscap_cis")]
    OpenscapCis,
    #[serde(alias = "vuln_scan")]
    VulnScan,
}

impl ToolKind {
    pub const ALL: [ToolKind; 6] = [
        ToolKind::Lynis,
        ToolKind::OpenscapStandard,
        ToolKind::Aide,
        ToolKind::Tripwire,
        ToolKind::OpenscapCis,
        ToolKind::VulnScan,
    ];

    /// Canonical identifier, e.g. `OPENSCAP_CIS`.
    pub fn as_str(self) -> &'static str {
        match self {
            ToolKind::Lynis => "LYNIS",
            ToolKind::OpenscapStandard => "OPENSCAP_STANDARD",
            ToolKind::Aide => "AIDE",
            ToolKind::Tripwire => "TRIPWIRE",
            ToolKind::OpenscapCis => "OPENSCAP_CIS",
            ToolKind::VulnScan => "VULN_SCAN",
        }
    }

    /// Lower-case key used in configuration and manifest files.
    pub fn config_key(self) -> &'static str {
        match self {
            ToolKind::Lynis => "lynis",
            ToolKind::OpenscapStandard => "openscap_standard",
            ToolKind::Aide => "aide",
            ToolKind::Tripwire => "tripwire",
            ToolKind::OpenscapCis => "openscap_cis",
            ToolKind::VulnScan => "vuln_scan",
        }
    }

    /// Human-readable name for report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ToolKind::Lynis => "Lynis",
            ToolKind::OpenscapStandard => "OpenSCAP Standard",
            ToolKind::Aide => "AIDE",
            ToolKind::Tripwire => "Tripwire",
            ToolKind::OpenscapCis => "OpenSCAP CIS",
            ToolKind::VulnScan => "Vulnerability",
        }
    }

    /// Compliance tools are expected to rise with hardening; file-integrity
    /// and exposure scores are reported as absolute point changes instead.
    pub fn is_compliance(self) -> bool {
        matches!(
            self,
            ToolKind::Lynis | ToolKind::OpenscapStandard | ToolKind::OpenscapCis
        )
    }
}

impl fmt::Display for ToolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown tool `{0}` (expected one of lynis, openscap-standard, aide, tripwire, openscap-cis, vuln-scan)")]
pub struct UnknownTool(pub String);

impl FromStr for ToolKind {
    type Err = UnknownTool;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let tool = match key.as_str() {
            "lynis" => ToolKind::Lynis,
            "openscap_standard" | "scap_standard" | "standard" | "stig" => {
                ToolKind::OpenscapStandard
            }
            "aide" => ToolKind::Aide,
            "tripwire" => ToolKind::Tripwire,
            "openscap_cis" | "scap_cis" | "cis" => ToolKind::OpenscapCis,
            "vuln_scan" | "vuln" | "vulnerability" | "nmap" => ToolKind::VulnScan,
            _ => return Err(UnknownTool(s.to_string())),
        };
        Ok(tool)
    }
}

/// Vulnerability severity class, highest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Severity {
    #[serde(alias = "critical")]
    Critical,
    #[serde(alias = "high")]
    High,
    #[serde(alias = "medium")]
    Medium,
    #[serde(alias = "low")]
    Low,
}

impl Severity {
    pub const ALL: [Severity; 4] = [
        Severity::Critical,
        Severity::High,
        Severity::Medium,
        Severity::Low,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Critical => "CRITICAL",
            Severity::High => "HIGH",
            Severity::Medium => "MEDIUM",
            Severity::Low => "LOW",
        }
    }

    /// Matches a free-text risk keyword such as `High` or `critical`.
    pub fn from_keyword(word: &str) -> Option<Severity> {
        match word.trim().to_ascii_lowercase().as_str() {
            "critical" => Some(Severity::Critical),
            "high" => Some(Severity::High),
            "medium" | "moderate" => Some(Severity::Medium),
            "low" => Some(Severity::Low),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which OpenSCAP profile a result document was evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScapProfile {
    Standard,
    Cis,
}

impl ScapProfile {
    pub fn tool(self) -> ToolKind {
        match self {
            ScapProfile::Standard => ToolKind::OpenscapStandard,
            ScapProfile::Cis => ToolKind::OpenscapCis,
        }
    }
}
