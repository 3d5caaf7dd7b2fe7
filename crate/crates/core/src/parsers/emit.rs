//! Writers that render raw metrics back into each tool's native format.
//!
//! Used to build test fixtures and benchmark inputs; for every report the
//! matching parser recovers the same metrics.

use std::fmt::Write;

use crate::model::{AideReport, LynisReport, ScapReport, TripwireReport, VulnReport};

pub fn lynis(report: &LynisReport) -> String {
    format!(
        "# Lynis Report\nreport_version_major=1\nreport_version_minor=0\n\
         lynis_version=3.0.9\nos=Linux\nos_name=Ubuntu\n\
         hardening_index={}\n",
        report.hardening_index
    )
}

/// XCCDF result document with the given number of rule-results per result value.
pub fn xccdf_with(results: &[(&str, u64)]) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <Benchmark xmlns=\"http://checklists.nist.gov/xccdf/1.2\" id=\"xccdf_org.ssgproject.content_benchmark_UBUNTU2204\">\n\
         <TestResult id=\"xccdf_org.open-scap_testresult_profile\" start-time=\"2025-03-02T10:00:00\" end-time=\"2025-03-02T10:04:12\">\n\
         <target>node1</target>\n",
    );
    let mut n = 0u64;
    for &(value, count) in results {
        for _ in 0..count {
            n += 1;
            let _ = writeln!(
                out,
                "<rule-result idref=\"xccdf_org.ssgproject.content_rule_r{n:04}\" severity=\"medium\" weight=\"1.000000\">\
                 <result>{value}</result></rule-result>"
            );
        }
    }
    out.push_str("<score system=\"urn:xccdf:scoring:default\" maximum=\"100.000000\">0</score>\n</TestResult>\n</Benchmark>\n");
    out
}

pub fn xccdf(report: &ScapReport) -> String {
    xccdf_with(&[("pass", report.pass_count), ("fail", report.fail_count)])
}

pub fn aide(report: &AideReport) -> String {
    if report.total() == 0 {
        return "Start timestamp: 2025-03-02 10:00:01 +0000 (AIDE 0.17.4)\n\
                AIDE found NO differences between database and filesystem. Looks okay!!\n"
            .to_string();
    }
    format!(
        "Start timestamp: 2025-03-02 10:00:01 +0000 (AIDE 0.17.4)\n\
         AIDE found differences between database and filesystem!!\n\n\
         Summary:\n  Total number of entries:\t{}\n  Added entries:\t\t{}\n  \
         Removed entries:\t\t{}\n  Changed entries:\t\t{}\n\n\
         ---------------------------------------------------\n",
        report.total() + 50_000,
        report.added,
        report.removed,
        report.changed
    )
}

pub fn tripwire(report: &TripwireReport) -> String {
    format!(
        "Open Source Tripwire(R) 2.4.3.7 Integrity Check Report\n\n\
         Report generated by:          root\n\
         Report created on:            Sun 02 Mar 2025 10:20:00 AM UTC\n\n\
         ===============================================================================\n\
         Report Summary:\n\
         ===============================================================================\n\n\
         Host name:                    node1\n\
         Total objects scanned:  {}\n\
         Total violations found:  {}\n",
        thousands(report.objects_scanned),
        thousands(report.violations)
    )
}

/// nmap XML for one host.
///
/// Each finding becomes a `vulns`-library script: `State: VULNERABLE` when
/// confirmed, `State: LIKELY VULNERABLE` otherwise. Findings on a port that
/// is not among the open ones are attached to a closed port. The firewall
/// state is not encoded; parsing recovers it from the filtered count.
pub fn nmap(report: &VulnReport) -> String {
    let mut ports: Vec<u16> = Vec::new();
    for f in &report.findings {
        if let Some(p) = f.port {
            if !ports.contains(&p) {
                ports.push(p);
            }
        }
    }
    let mut next = 1u16;
    while (ports.len() as u64) < report.open_ports {
        if !ports.contains(&next) {
            ports.push(next);
        }
        next += 1;
    }

    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!DOCTYPE nmaprun>\n\
         <nmaprun scanner=\"nmap\" args=\"nmap -sV -p- --script vuln,vulners -oX scan.xml 10.0.0.2\" start=\"1740900000\" version=\"7.94\" xmloutputversion=\"1.05\">\n\
         <host starttime=\"1740900000\" endtime=\"1740900100\"><status state=\"up\" reason=\"arp-response\"/>\n\
         <address addr=\"10.0.0.2\" addrtype=\"ipv4\"/>\n<ports>\n",
    );
    if report.filtered_ports > 0 {
        let _ = writeln!(
            out,
            "<extraports state=\"filtered\" count=\"{}\"><extrareasons reason=\"no-response\" count=\"{}\"/></extraports>",
            report.filtered_ports, report.filtered_ports
        );
    }
    for (i, port) in ports.iter().enumerate() {
        let state = if (i as u64) < report.open_ports {
            "open"
        } else {
            "closed"
        };
        let _ = writeln!(
            out,
            "<port protocol=\"tcp\" portid=\"{port}\"><state state=\"{state}\" reason=\"syn-ack\"/>"
        );
        for f in report.findings.iter().filter(|f| f.port == Some(*port)) {
            out.push_str(&script(f));
        }
        out.push_str("</port>\n");
    }
    out.push_str("</ports>\n");
    let host_level: Vec<_> = report
        .findings
        .iter()
        .filter(|f| f.port.is_none())
        .collect();
    if !host_level.is_empty() {
        out.push_str("<hostscript>\n");
        for f in host_level {
            out.push_str(&script(f));
        }
        out.push_str("</hostscript>\n");
    }
    out.push_str(
        "</host>\n<runstats><finished time=\"1740900100\" elapsed=\"100\"/>\
         <hosts up=\"1\" down=\"0\" total=\"1\"/></runstats>\n</nmaprun>\n",
    );
    out
}

fn script(f: &crate::model::VulnFinding) -> String {
    let is_cve = f.identifier.starts_with("CVE-");
    let id = if is_cve {
        format!("vuln-{}", f.identifier.to_ascii_lowercase())
    } else {
        f.identifier.clone()
    };
    let state = if f.confirmed {
        "VULNERABLE"
    } else {
        "LIKELY VULNERABLE"
    };
    let mut body = format!("\n  VULNERABLE:\n  {}\n    State: {state}\n", f.description);
    if is_cve {
        let _ = writeln!(body, "    IDs:  CVE:{}", f.identifier);
    }
    let _ = write!(body, "    Risk factor: {}", capitalize(f.severity.as_str()));
    if let Some(c) = f.cvss {
        let _ = write!(body, "  CVSS: {c}");
    }
    body.push('\n');
    format!(
        "<script id=\"{}\" output=\"{}\"/>\n",
        xml_escape(&id),
        xml_escape(&body)
    )
}

fn capitalize(s: &str) -> String {
    let lower = s.to_ascii_lowercase();
    let mut c = lower.chars();
    match c.next() {
        Some(first) => first.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#xa;"),
            _ => out.push(ch),
        }
    }
    out
}

fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousands_separators() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(999), "999");
        assert_eq!(thousands(76000), "76,000");
        assert_eq!(thousands(1234567), "1,234,567");
    }
}
