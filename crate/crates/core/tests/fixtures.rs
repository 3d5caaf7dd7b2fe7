use std::path::{Path, PathBuf};

use uca_core::manifest::Manifest;
use uca_core::model::{RawToolReport, ScapProfile};
use uca_core::parsers::{parse_file, ParseOptions};
use uca_core::scoring::{aggregate, normalize};
use uca_core::{ToolKind, WeightProfile};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn parse(tool: ToolKind, rel: &str) -> RawToolReport {
    parse_file(tool, &fixture(rel), ParseOptions::default())
        .unwrap()
        .report
}

fn score(raw: &RawToolReport) -> f64 {
    normalize(raw, &WeightProfile::default()).unwrap().value
}

#[test]
fn baseline_lynis() {
    let raw = parse(ToolKind::Lynis, "baseline/lynis-report.dat");
    assert!(matches!(raw, RawToolReport::Lynis(r) if r.hardening_index == 59));
}

#[test]
fn baseline_scap_profiles() {
    let std = parse(ToolKind::OpenscapStandard, "baseline/openscap-standard.xml");
    let RawToolReport::Scap(r) = &std else {
        panic!()
    };
    assert_eq!(
        (r.profile, r.pass_count, r.fail_count),
        (ScapProfile::Standard, 29, 14)
    );
    assert!((score(&std) - 67.44).abs() < 0.01);

    let cis = parse(ToolKind::OpenscapCis, "baseline/openscap-cis.xml");
    let RawToolReport::Scap(r) = &cis else {
        panic!()
    };
    assert_eq!(
        (r.profile, r.pass_count, r.fail_count),
        (ScapProfile::Cis, 137, 100)
    );
    assert!((score(&cis) - 57.81).abs() < 0.01);
}

#[test]
fn scap_exclusions_are_reported() {
    let p = parse_file(
        ToolKind::OpenscapStandard,
        &fixture("baseline/openscap-standard.xml"),
        ParseOptions::default(),
    )
    .unwrap();
    assert_eq!(p.diagnostics.excluded.get("notapplicable"), Some(&4));
    assert_eq!(p.diagnostics.excluded.get("notchecked"), Some(&1));
}

#[test]
fn aide_levels() {
    for (rel, total, expect) in [
        ("baseline/aide-check.txt", 46, 83.37),
        ("partial/aide-check.txt", 171, 77.67),
        ("full/aide-check.txt", 317, 74.99),
    ] {
        let raw = parse(ToolKind::Aide, rel);
        let RawToolReport::Aide(r) = &raw else {
            panic!()
        };
        assert_eq!(r.total(), total, "{rel}");
        assert!((score(&raw) - expect).abs() < 0.01, "{rel}");
    }
}

#[test]
fn tripwire_levels() {
    let raw = parse(ToolKind::Tripwire, "baseline/tripwire-check.txt");
    assert!(
        matches!(raw, RawToolReport::Tripwire(r) if r.objects_scanned == 76_472 && r.violations == 13_459)
    );
    assert!((score(&raw) - 82.40).abs() < 0.01);

    let raw = parse(ToolKind::Tripwire, "full/tripwire-check.txt");
    assert!((score(&raw) - 77.70).abs() < 0.01);
}

#[test]
fn baseline_nmap() {
    let raw = parse(ToolKind::VulnScan, "baseline/nmap.xml");
    let RawToolReport::Vuln(r) = &raw else {
        panic!()
    };
    assert_eq!(r.open_ports, 2);
    assert_eq!(r.filtered_ports, 0);
    assert!(!r.firewall_active);
    assert_eq!(r.confirmed_count, 4);
    assert_eq!(r.findings.len(), 9);
    assert!(r.findings.iter().all(|f| f.identifier != "CVE-2007-6750"));
    assert!(r
        .findings
        .iter()
        .all(|f| !f.identifier.starts_with("PACKETSTORM")));
    assert_eq!(score(&raw), 0.0);
}

#[test]
fn filtered_scan_turns_on_firewall() {
    let raw = parse(ToolKind::VulnScan, "full/nmap.xml");
    let RawToolReport::Vuln(r) = &raw else {
        panic!()
    };
    assert_eq!((r.open_ports, r.filtered_ports), (1, 65_534));
    assert!(r.firewall_active);
    assert!(r.findings.is_empty());
    assert_eq!(score(&raw), 100.0);

    let forced = parse_file(
        ToolKind::VulnScan,
        &fixture("full/nmap.xml"),
        ParseOptions {
            firewall_override: Some(false),
        },
    )
    .unwrap()
    .report;
    assert!(matches!(forced, RawToolReport::Vuln(r) if !r.firewall_active));
}

#[test]
fn baseline_manifest_composite() {
    let profile = WeightProfile::default();
    let m = Manifest::load(&fixture("baseline/manifest.toml")).unwrap();
    let scored = m.score(&profile).unwrap();
    assert_eq!(scored.diagnostics.len(), 6);
    let a = aggregate(&scored.scores, &profile, "baseline").unwrap();
    assert!((a.composite - 58.34).abs() <= 0.01, "{}", a.composite);
}

#[test]
fn manifest_without_vuln_entry_fails() {
    let m = Manifest::load(&fixture("baseline/manifest-missing-vuln.toml")).unwrap();
    let err = m.score(&WeightProfile::default()).unwrap_err();
    assert_eq!(err.code(), "TOOL_MISSING");
    assert!(err.to_string().contains("VULN_SCAN"));
}

#[test]
fn literal_level_manifests() {
    let profile = WeightProfile::default();
    for (level, expect) in [("baseline", 58.34), ("partial", 64.80), ("full", 68.17)] {
        let m = Manifest::load(&fixture(&format!("levels/{level}.toml"))).unwrap();
        let scored = m.score(&profile).unwrap();
        assert!(scored.diagnostics.is_empty());
        let a = aggregate(&scored.scores, &profile, level).unwrap();
        assert!(
            (a.composite - expect).abs() <= 0.01,
            "{level}: {}",
            a.composite
        );
    }
}

#[test]
fn parsing_is_deterministic() {
    for (tool, rel) in [
        (ToolKind::Lynis, "baseline/lynis-report.dat"),
        (ToolKind::OpenscapCis, "baseline/openscap-cis.xml"),
        (ToolKind::Aide, "full/aide-check.txt"),
        (ToolKind::Tripwire, "baseline/tripwire-check.txt"),
        (ToolKind::VulnScan, "baseline/nmap.xml"),
    ] {
        let a = parse_file(tool, &fixture(rel), ParseOptions::default()).unwrap();
        let b = parse_file(tool, &fixture(rel), ParseOptions::default()).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.diagnostics, b.diagnostics);
    }
}
