//! Synthetic inputs shared by the benchmarks.

use uca_core::model::{Severity, VulnFinding, VulnReport};
use uca_core::scoring::classify_severity;

/// A scan of one host with `findings` vulnerabilities spread over `open` ports.
pub fn vuln_report(open: u64, findings: usize) -> VulnReport {
    let findings: Vec<VulnFinding> = (0..findings)
        .map(|i| {
            let cvss = (i % 100) as f64 / 10.0;
            VulnFinding {
                identifier: format!("CVE-2024-{:05}", 10000 + i),
                cvss: Some(cvss),
                severity: classify_severity(cvss).unwrap_or(Severity::Low),
                confirmed: i % 7 == 0,
                port: Some(1 + (i as u64 % open.max(1)) as u16),
                description: format!("synthetic finding {i}"),
            }
        })
        .collect();
    let confirmed_count = findings.iter().filter(|f| f.confirmed).count() as u64;
    VulnReport {
        open_ports: open,
        filtered_ports: 65535 - open,
        firewall_active: true,
        findings,
        confirmed_count,
    }
}
