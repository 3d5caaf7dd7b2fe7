//! Score manifests: which report file (or literal score) stands for each tool.
//!
//! ```toml
//! label = "baseline"
//! host = "node1"
//!
//! [tools]
//! lynis = "lynis-report.dat"
//! openscap_standard = "stig-results.xml"
//! openscap_cis = "cis-results.xml"
//! aide = "aide-check.txt"
//! tripwire = { score = 82.4 }
//! vuln_scan = { path = "nmap.xml", firewall = true }
//! ```
//!
//! Relative paths resolve against the manifest's directory. A literal
//! `score` is used as-is for tools scanned out-of-band.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::thread;

use serde::{Deserialize, Serialize};

use crate::model::{NormalizedScore, ToolKind, WeightProfile};
use crate::parsers::{self, ParseDiagnostics, ParseError, ParseOptions};
use crate::scoring::{self, ScoreError};

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("IO_FAILURE: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("MANIFEST_INVALID: {path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("TOOL_MISSING: manifest has no entry for {}", .0.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", "))]
    ToolMissing(Vec<ToolKind>),
    #[error("{tool}: {path}: {source}")]
    Parse {
        tool: ToolKind,
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{tool}: {source}")]
    Score {
        tool: ToolKind,
        #[source]
        source: ScoreError,
    },
}

impl ManifestError {
    pub fn code(&self) -> &'static str {
        match self {
            ManifestError::Io { .. } => "IO_FAILURE",
            ManifestError::Invalid { .. } => "MANIFEST_INVALID",
            ManifestError::ToolMissing(_) => "TOOL_MISSING",
            ManifestError::Parse { source, .. } => source.code(),
            ManifestError::Score { source, .. } => source.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ManifestEntry {
    Path(PathBuf),
    Report {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        firewall: Option<bool>,
    },
    Score {
        score: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
    #[serde(default)]
    pub tools: BTreeMap<ToolKind, ManifestEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Normalized scores for every tool in a manifest, plus the parse
/// diagnostics of each report read.
#[derive(Debug, Clone)]
pub struct ManifestScores {
    pub scores: BTreeMap<ToolKind, NormalizedScore>,
    pub diagnostics: Vec<ParseDiagnostics>,
}

impl Manifest {
    pub fn parse(text: &str, origin: &Path) -> Result<Manifest, ManifestError> {
        let mut m: Manifest = toml::from_str(text).map_err(|e| ManifestError::Invalid {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        m.base_dir = origin.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Manifest, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Manifest::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Parses and normalizes every entry. All six tools must be present.
    /// Reports are parsed concurrently.
    pub fn score(&self, profile: &WeightProfile) -> Result<ManifestScores, ManifestError> {
        let missing: Vec<ToolKind> = ToolKind::ALL
            .into_iter()
            .filter(|t| !self.tools.contains_key(t))
            .collect();
        if !missing.is_empty() {
            return Err(ManifestError::ToolMissing(missing));
        }

        let results: Vec<Result<(NormalizedScore, Option<ParseDiagnostics>), ManifestError>> =
            thread::scope(|s| {
                let handles: Vec<_> = self
                    .tools
                    .iter()
                    .map(|(&tool, entry)| s.spawn(move || self.score_entry(tool, entry, profile)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("manifest worker panicked"))
                    .collect()
            });

        let mut out = ManifestScores {
            scores: BTreeMap::new(),
            diagnostics: Vec::new(),
        };
        for r in results {
            let (score, diag) = r?;
            out.diagnostics.extend(diag);
            out.scores.insert(score.tool, score);
        }
        Ok(out)
    }

    fn score_entry(
        &self,
        tool: ToolKind,
        entry: &ManifestEntry,
        profile: &WeightProfile,
    ) -> Result<(NormalizedScore, Option<ParseDiagnostics>), ManifestError> {
        let (path, firewall) = match entry {
            ManifestEntry::Score { score } => {
                if !(0.0..=100.0).contains(score) {
                    return Err(ManifestError::Invalid {
                        path: self.base_dir.clone(),
                        message: format!("{tool}: literal score {score} is outside 0-100"),
                    });
                }
                return Ok((NormalizedScore::supplied(tool, *score), None));
            }
            ManifestEntry::Path(p) => (self.resolve(p), None),
            ManifestEntry::Report { path, firewall } => (self.resolve(path), *firewall),
        };
        let parsed = parsers::parse_file(
            tool,
            &path,
            ParseOptions {
                firewall_override: firewall,
            },
        )
        .map_err(|source| ManifestError::Parse {
            tool,
            path: path.clone(),
            source,
        })?;
        let score = scoring::normalize(&parsed.report, profile)
            .map_err(|source| ManifestError::Score { tool, source })?;
        Ok((score, Some(parsed.diagnostics)))
    }
}
