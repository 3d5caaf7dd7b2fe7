//! TOML configuration: weights, vulnerability penalties, history location
//! and tool command lines. Every section is optional; an empty file yields
//! the built-in defaults.
//!
//! ```toml
//! [weights]
//! lynis = 0.20
//! openscap_standard = 0.15
//! aide = 0.15
//! tripwire = 0.15
//! openscap_cis = 0.20
//! vuln_scan = 0.15
//!
//! [vulnerability]
//! severity = { critical = 15, high = 8, medium = 4, low = 1 }
//! port_penalty = 3
//! confirmed_penalty = 10
//! firewall_discount = 10
//!
//! [history]
//! path = "/var/lib/uca/history.jsonl"
//!
//! [runner]
//! output_dir = "/var/tmp/uca"
//! target = "10.0.0.2"
//! datastream = "/usr/share/xml/scap/ssg/content/ssg-ubuntu2204-ds.xml"
//!
//! [runner.tools.aide]
//! command = "aide --check --config /etc/aide/aide.conf"
//! timeout = 5400
//! accepted_exit_codes = [0, 1, 2, 3, 4, 5, 6, 7]
//!
//! [runner.integrity.aide]
//! command = "aide --init"
//! database = "/var/lib/aide/aide.db"
//! promote_from = "/var/lib/aide/aide.db.new"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::model::{Severity, ToolKind, WeightError, WeightProfile};
use crate::runner::{self, IntegrityInit, ToolInvocation};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "UCA_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("IO_FAILURE: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CONFIG_INVALID: {path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Weights(#[from] WeightError),
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Io { .. } => "IO_FAILURE",
            ConfigError::Invalid { .. } => "CONFIG_INVALID",
            ConfigError::Weights(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub weights: Option<BTreeMap<ToolKind, f64>>,
    pub vulnerability: Option<VulnerabilitySection>,
    pub history: Option<HistorySection>,
    pub runner: Option<RunnerSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VulnerabilitySection {
    pub severity: Option<BTreeMap<Severity, f64>>,
    pub port_penalty: Option<f64>,
    pub confirmed_penalty: Option<f64>,
    pub firewall_discount: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistorySection {
    pub path: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunnerSection {
    pub output_dir: Option<PathBuf>,
    pub target: Option<String>,
    pub datastream: Option<String>,
    pub parallel: Option<bool>,
    #[serde(default)]
    pub tools: BTreeMap<ToolKind, ToolSection>,
    #[serde(default)]
    pub integrity: BTreeMap<ToolKind, IntegritySection>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolSection {
    pub enabled: Option<bool>,
    pub command: Option<String>,
    /// Seconds.
    pub timeout: Option<u64>,
    pub accepted_exit_codes: Option<Vec<i32>>,
    /// Report file name, relative to the output directory.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegritySection {
    pub command: Option<String>,
    pub database: Option<PathBuf>,
    pub promote_from: Option<PathBuf>,
    pub timeout: Option<u64>,
    pub accepted_exit_codes: Option<Vec<i32>>,
}

impl Config {
    pub fn parse(text: &str, origin: &Path) -> Result<Config, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Config::parse(&text, path)
    }

    /// The validated weight profile, defaults filling unspecified entries.
    /// A `[weights]` table must list all six tools.
    pub fn weight_profile(&self) -> Result<WeightProfile, ConfigError> {
        let mut profile = WeightProfile::default();
        if let Some(w) = &self.weights {
            profile.tool_weights = w.clone();
        }
        if let Some(v) = &self.vulnerability {
            if let Some(sev) = &v.severity {
                for (&s, &w) in sev {
                    profile.severity_weights.insert(s, w);
                }
            }
            if let Some(p) = v.port_penalty {
                profile.port_penalty = p;
            }
            if let Some(p) = v.confirmed_penalty {
                profile.confirmed_penalty = p;
            }
            if let Some(p) = v.firewall_discount {
                profile.firewall_discount = p;
            }
        }
        profile.validate()?;
        Ok(profile)
    }

    pub fn history_path(&self) -> Option<&Path> {
        self.history.as_ref().map(|h| h.path.as_path())
    }

    fn runner(&self) -> RunnerSection {
        self.runner.clone().unwrap_or_default()
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.runner().output_dir
    }

    pub fn parallel(&self) -> bool {
        self.runner().parallel.unwrap_or(false)
    }

    /// Invocations for every enabled tool (or only `only`, when given).
    pub fn invocations(&self, output_dir: &Path, only: Option<&[ToolKind]>) -> Vec<ToolInvocation> {
        let runner = self.runner();
        ToolKind::ALL
            .into_iter()
            .filter(|t| only.is_none_or(|o| o.contains(t)))
            .filter_map(|tool| {
                let section = runner.tools.get(&tool).cloned().unwrap_or_default();
                if only.is_none() && section.enabled == Some(false) {
                    return None;
                }
                let mut inv = runner::default_invocation(tool, output_dir);
                if let Some(t) = &runner.target {
                    inv.vars.insert("target".into(), t.clone());
                }
                if let Some(d) = &runner.datastream {
                    inv.vars.insert("datastream".into(), d.clone());
                }
                if let Some(c) = section.command {
                    inv.command_template = c;
                }
                if let Some(s) = section.timeout {
                    inv.timeout = Duration::from_secs(s);
                }
                if let Some(codes) = section.accepted_exit_codes {
                    inv.accepted_exit_codes = codes.into_iter().collect();
                }
                if let Some(o) = section.output {
                    inv.output_path = output_dir.join(o);
                }
                Some(inv)
            })
            .collect()
    }

    pub fn integrity_init(&self, tool: ToolKind) -> Option<IntegrityInit> {
        let mut init = runner::default_integrity_init(tool)?;
        if let Some(s) = self.runner().integrity.get(&tool) {
            if let Some(c) = &s.command {
                init.command_template = c.clone();
            }
            if let Some(d) = &s.database {
                init.database = d.clone();
            }
            if s.promote_from.is_some() {
                init.promote_from = s.promote_from.clone();
            }
            if let Some(t) = s.timeout {
                init.timeout = Duration::from_secs(t);
            }
            if let Some(codes) = &s.accepted_exit_codes {
                init.accepted_exit_codes = codes.iter().copied().collect();
            }
        }
        Some(init)
    }
}
