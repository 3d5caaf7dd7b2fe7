//! nmap XML output (`-oX`), including NSE vulnerability script results.
//!
//! Two script output shapes produce findings:
//! - the `vulners` script, one unconfirmed finding per listed CVE with its CVSS;
//! - scripts built on the NSE `vulns` library, whose output carries a
//!   `State:` line per vulnerability. `VULNERABLE` marks a confirmed finding,
//!   `LIKELY VULNERABLE` an unconfirmed one, `NOT VULNERABLE` none.

use std::sync::LazyLock;

use regex::Regex;
use roxmltree::Node;

use super::xccdf::parse_document;
use super::{LineIndex, ParseDiagnostics, ParseError, Parsed};
use crate::model::{Severity, ToolKind, VulnFinding, VulnReport};
use crate::scoring::classify_severity;

/// Filtered-port count at or above which a host firewall is assumed.
pub const FIREWALL_FILTERED_THRESHOLD: u64 = 100;

static CVE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"CVE-\d{4}-\d{4,}").unwrap());
static STATE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*State:\s*(.+?)\s*$").unwrap());
static CVSS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\bCVSS(?:v[23](?:\.\d)?)?(?:\s*score)?:?\s*(\d+(?:\.\d+)?)").unwrap()
});
static RISK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)Risk factor:\s*([A-Za-z]+)").unwrap());
static VULNERS_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(\S+)\s+(\d+(?:\.\d+)?)\s+https?://\S+").unwrap());

/// Whether the scanned host is behind an active packet filter.
pub fn detect_firewall(_open_ports: u64, filtered_ports: u64, override_: Option<bool>) -> bool {
    override_.unwrap_or(filtered_ports >= FIREWALL_FILTERED_THRESHOLD)
}

pub fn parse_nmap(scan_xml: &str) -> Result<Parsed<VulnReport>, ParseError> {
    parse_nmap_with(scan_xml, None)
}

/// Like [`parse_nmap`], with an explicit firewall state that replaces the
/// filtered-port heuristic.
pub fn parse_nmap_with(
    scan_xml: &str,
    firewall_override: Option<bool>,
) -> Result<Parsed<VulnReport>, ParseError> {
    let doc = parse_document(scan_xml)?;
    let root = doc.root_element();
    if root.tag_name().name() != "nmaprun" {
        return Err(ParseError::MalformedXml(format!(
            "expected <nmaprun> root element, found <{}>",
            root.tag_name().name()
        )));
    }
    let mut diag = ParseDiagnostics::new(ToolKind::VulnScan);
    let hosts: Vec<Node> = root.children().filter(|n| is(n, "host")).collect();
    if hosts.is_empty() {
        return Err(ParseError::NoHost);
    }
    if hosts.len() > 1 {
        diag.warn(format!(
            "{} hosts in scan; port and finding counts are summed",
            hosts.len()
        ));
    }

    let lines = LineIndex::new(scan_xml);
    let line = |n: &Node| lines.line(n.range().start);
    let mut open = 0u64;
    let mut filtered = 0u64;
    let mut findings: Vec<VulnFinding> = Vec::new();

    for host in &hosts {
        for ports in host.children().filter(|n| is(n, "ports")) {
            for child in ports.children().filter(|n| n.is_element()) {
                match child.tag_name().name() {
                    "extraports" => {
                        let state = child.attribute("state").unwrap_or("");
                        let count: u64 = child
                            .attribute("count")
                            .and_then(|c| c.parse().ok())
                            .unwrap_or(0);
                        if state == "filtered" {
                            filtered += count;
                            diag.trace(format!(
                                "line {}: extraports filtered count={count}",
                                line(&child)
                            ));
                        } else if state == "open" {
                            open += count;
                            diag.trace(format!(
                                "line {}: extraports open count={count}",
                                line(&child)
                            ));
                        }
                    }
                    "port" => {
                        let portid = child
                            .attribute("portid")
                            .and_then(|p| p.parse::<u16>().ok());
                        let state = child
                            .children()
                            .find(|n| is(n, "state"))
                            .and_then(|s| s.attribute("state"))
                            .unwrap_or("");
                        match state {
                            "open" => {
                                open += 1;
                                diag.trace(format!(
                                    "line {}: port {} open",
                                    line(&child),
                                    portid.unwrap_or(0)
                                ));
                            }
                            "filtered" => {
                                filtered += 1;
                                diag.trace(format!(
                                    "line {}: port {} filtered",
                                    line(&child),
                                    portid.unwrap_or(0)
                                ));
                            }
                            _ => {}
                        }
                        for script in child.children().filter(|n| is(n, "script")) {
                            collect_script(
                                &script,
                                portid,
                                line(&script),
                                &mut findings,
                                &mut diag,
                            );
                        }
                    }
                    _ => {}
                }
            }
        }
        for hs in host.children().filter(|n| is(n, "hostscript")) {
            for script in hs.children().filter(|n| is(n, "script")) {
                collect_script(&script, None, line(&script), &mut findings, &mut diag);
            }
        }
    }

    let confirmed_count = findings.iter().filter(|f| f.confirmed).count() as u64;
    let firewall_active = detect_firewall(open, filtered, firewall_override);
    diag.trace(format!(
        "open {open}, filtered {filtered}, findings {}, confirmed {confirmed_count}, firewall {firewall_active}{}",
        findings.len(),
        if firewall_override.is_some() { " (override)" } else { "" }
    ));

    Ok(Parsed {
        report: VulnReport {
            open_ports: open,
            filtered_ports: filtered,
            firewall_active,
            findings,
            confirmed_count,
        },
        diagnostics: diag,
    })
}

fn is(node: &Node, local: &str) -> bool {
    node.is_element() && node.tag_name().name() == local
}

fn collect_script(
    script: &Node,
    port: Option<u16>,
    line: u32,
    findings: &mut Vec<VulnFinding>,
    diag: &mut ParseDiagnostics,
) {
    let id = script.attribute("id").unwrap_or("");
    let output = script.attribute("output").unwrap_or("");
    let mut found = if id == "vulners" {
        vulners_findings(script, output, port)
    } else if output.lines().any(|l| STATE.is_match(l)) {
        vulns_library_findings(id, output, port, diag)
    } else if id.contains("vuln") {
        bare_cve_findings(id, output, port)
    } else {
        Vec::new()
    };

    for f in found.iter_mut() {
        if let Some(score) = f.cvss {
            match classify_severity(score) {
                Ok(sev) => f.severity = sev,
                Err(e) => {
                    diag.warn(format!("line {line}: {}: {e}; CVSS ignored", f.identifier));
                    f.cvss = None;
                }
            }
        }
    }

    for f in found {
        diag.trace(format!(
            "line {line}: script {id}: {} {} cvss={:?} confirmed={}",
            f.identifier, f.severity, f.cvss, f.confirmed
        ));
        if let Some(existing) = findings
            .iter_mut()
            .find(|e| e.identifier == f.identifier && e.port == f.port)
        {
            diag.warn(format!(
                "line {line}: {} on port {:?} already reported; merged",
                f.identifier, f.port
            ));
            if f.confirmed && !existing.confirmed {
                *existing = f;
            }
            continue;
        }
        findings.push(f);
    }
}

fn finding(
    identifier: String,
    cvss: Option<f64>,
    severity: Option<Severity>,
    confirmed: bool,
    port: Option<u16>,
    description: String,
) -> VulnFinding {
    VulnFinding {
        identifier,
        cvss,
        severity: severity.unwrap_or(Severity::Low),
        confirmed,
        port,
        description,
    }
}

/// `vulners` lists CVEs by detected product version; none are confirmed.
/// Non-CVE entries (exploit-db mirrors and the like) repeat a CVE and are skipped.
fn vulners_findings(script: &Node, output: &str, port: Option<u16>) -> Vec<VulnFinding> {
    let mut out = Vec::new();
    let entries: Vec<Node> = script
        .descendants()
        .filter(|n| {
            is(n, "table")
                && n.children()
                    .any(|c| is(&c, "elem") && c.attribute("key") == Some("id"))
        })
        .collect();

    if !entries.is_empty() {
        for entry in entries {
            let elem = |key: &str| {
                entry
                    .children()
                    .find(|c| is(c, "elem") && c.attribute("key") == Some(key))
                    .and_then(|c| c.text())
                    .map(str::trim)
            };
            let Some(id) = elem("id") else { continue };
            if !CVE.is_match(id) {
                continue;
            }
            let cvss = elem("cvss").and_then(|c| c.parse::<f64>().ok());
            let cpe = entry
                .parent()
                .and_then(|p| p.attribute("key"))
                .unwrap_or("vulners");
            out.push(finding(
                id.to_string(),
                cvss,
                None,
                false,
                port,
                format!("vulners: {cpe}"),
            ));
        }
        return out;
    }

    let mut context = String::from("vulners");
    for l in output.lines() {
        let trimmed = l.trim();
        if trimmed.ends_with(':') && trimmed.starts_with("cpe:") {
            context = format!("vulners: {}", trimmed.trim_end_matches(':'));
            continue;
        }
        if let Some(cap) = VULNERS_LINE.captures(l) {
            let id = &cap[1];
            if CVE.is_match(id) {
                out.push(finding(
                    id.to_string(),
                    cap[2].parse().ok(),
                    None,
                    false,
                    port,
                    context.clone(),
                ));
            }
        }
    }
    out
}

/// NSE `vulns` library report: title line, then `State:`, `IDs:`, `Risk factor:` etc.
fn vulns_library_findings(
    script_id: &str,
    output: &str,
    port: Option<u16>,
    diag: &mut ParseDiagnostics,
) -> Vec<VulnFinding> {
    let lines: Vec<&str> = output.lines().collect();
    let state_idx: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| STATE.is_match(l))
        .map(|(i, _)| i)
        .collect();

    let mut out = Vec::new();
    for (k, &i) in state_idx.iter().enumerate() {
        let state = STATE.captures(lines[i]).unwrap()[1].to_ascii_uppercase();
        let end = state_idx
            .get(k + 1)
            .map_or(lines.len(), |&next| next.saturating_sub(1));
        let title = lines[..i]
            .iter()
            .rev()
            .map(|l| l.trim())
            .find(|l| !l.is_empty() && *l != "VULNERABLE:")
            .unwrap_or(script_id)
            .to_string();

        let confirmed = if state.contains("NOT VULNERABLE") {
            diag.trace(format!("script {script_id}: {title:?} not vulnerable"));
            continue;
        } else if state.starts_with("VULNERABLE") {
            true
        } else if state.contains("VULNERABLE") {
            false
        } else {
            continue;
        };

        let block = lines[i..end.max(i + 1)].join("\n");
        let identifier = CVE
            .find(&block)
            .map_or_else(|| script_id.to_string(), |m| m.as_str().to_string());
        let cvss = CVSS.captures(&block).and_then(|c| c[1].parse::<f64>().ok());
        let severity = RISK
            .captures(&block)
            .and_then(|c| Severity::from_keyword(&c[1]));
        out.push(finding(identifier, cvss, severity, confirmed, port, title));
    }
    out
}

fn bare_cve_findings(script_id: &str, output: &str, port: Option<u16>) -> Vec<VulnFinding> {
    let mut ids: Vec<&str> = CVE.find_iter(output).map(|m| m.as_str()).collect();
    ids.dedup();
    let mut out: Vec<VulnFinding> = Vec::new();
    for id in ids {
        if out.iter().any(|f| f.identifier == id) {
            continue;
        }
        out.push(finding(
            id.to_string(),
            None,
            None,
            false,
            port,
            script_id.to_string(),
        ));
    }
    out
}
