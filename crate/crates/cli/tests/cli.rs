use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(rel)
}

fn uca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uca"))
        .args(args)
        .env_remove("UCA_CONFIG")
        .env_remove("RUST_LOG")
        .output()
        .expect("uca runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// History holding the baseline and full literal levels.
fn seeded_history() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("history.jsonl");
    for level in ["baseline", "partial", "full"] {
        let o = uca(&[
            "score",
            path(&fixture(&format!("levels/{level}.toml"))),
            "--record",
            "--history",
            path(&h),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    (dir, h)
}

#[test]
fn parse_aide_text() {
    let o = uca(&[
        "parse",
        "--tool",
        "aide",
        path(&fixture("full/aide-check.txt")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("tool: AIDE"), "{out}");
    assert!(out.contains("score: 74.99"), "{out}");
}

#[test]
fn parse_aide_json() {
    let o = uca(&[
        "--json",
        "parse",
        "--tool",
        "aide",
        path(&fixture("full/aide-check.txt")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tool"], "AIDE");
    assert_eq!(v["raw"]["added"], 129);
    assert_eq!(v["raw"]["changed"], 188);
    assert!((v["score"].as_f64().unwrap() - 75.0).abs() < 0.05);
}

#[test]
fn parse_missing_file_is_input_error() {
    let o = uca(&["parse", "--tool", "lynis", "/nonexistent/report.dat"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("IO_FAILURE"));
}

#[test]
fn parse_malformed_xml_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.xml");
    std::fs::write(&f, "<nmaprun><host>").unwrap();
    let o = uca(&["parse", "--tool", "nmap", path(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MALFORMED_XML"), "{}", stderr(&o));
}

#[test]
fn score_baseline_fixtures() {
    let o = uca(&["score", path(&fixture("baseline/manifest.toml"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("composite: 58.34"), "{}", stdout(&o));
}

#[test]
fn score_json_is_a_history_record() {
    let o = uca(&["--json", "score", path(&fixture("baseline/manifest.toml"))]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["assessment"]["label"], "baseline");
    assert!((v["assessment"]["composite"].as_f64().unwrap() - 58.34).abs() <= 0.01);
}

#[test]
fn min_score_gate() {
    let m = fixture("baseline/manifest.toml");
    let below = uca(&["score", path(&m), "--min-score", "60"]);
    assert_eq!(below.status.code(), Some(3));
    let above = uca(&["score", path(&m), "--min-score", "58"]);
    assert_eq!(above.status.code(), Some(0));
}

#[test]
fn missing_tool_is_input_error() {
    let o = uca(&[
        "score",
        path(&fixture("baseline/manifest-missing-vuln.toml")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("TOOL_MISSING") && err.contains("VULN_SCAN"),
        "{err}"
    );
}

#[test]
fn invalid_weights_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("weights.toml");
    std::fs::write(
        &w,
        "[weights]\nlynis = 0.5\nopenscap_standard = 0.15\naide = 0.15\n\
         tripwire = 0.15\nopenscap_cis = 0.20\nvuln_scan = 0.15\n",
    )
    .unwrap();
    let o = uca(&[
        "--weights",
        path(&w),
        "score",
        path(&fixture("levels/full.toml")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("WEIGHT_SUM_INVALID"), "{}", stderr(&o));
}

#[test]
fn compare_baseline_to_full() {
    let (_dir, h) = seeded_history();
    let o = uca(&["compare", "baseline", "full", "--history", path(&h)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("total delta +9.83"), "{out}");
    assert!(out.contains("dominant: VULN_SCAN +7.05 (71.7%)"), "{out}");
}

#[test]
fn compare_identical_assessments() {
    let (_dir, h) = seeded_history();
    let o = uca(&["compare", "full", "full", "--history", path(&h)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("total delta 0.00"), "{out}");
    assert!(out.contains("dominant: none"), "{out}");
}

#[test]
fn compare_across_weight_profiles_fails() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("weights.toml");
    std::fs::write(
        &w,
        "[weights]\nlynis = 0.25\nopenscap_standard = 0.10\naide = 0.15\n\
         tripwire = 0.15\nopenscap_cis = 0.20\nvuln_scan = 0.15\n",
    )
    .unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o = uca(&["--json", "score", path(&fixture("levels/baseline.toml"))]);
    std::fs::write(&a, &o.stdout).unwrap();
    let o = uca(&[
        "--json",
        "--weights",
        path(&w),
        "score",
        path(&fixture("levels/full.toml")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&b, &o.stdout).unwrap();

    let o = uca(&["compare", path(&a), path(&b)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("WEIGHT_MISMATCH"), "{}", stderr(&o));
}

#[test]
fn compare_manifests_directly() {
    let o = uca(&[
        "compare",
        path(&fixture("levels/baseline.toml")),
        path(&fixture("levels/full.toml")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("dominant: VULN_SCAN +7.05 (71.7%)"));
}

#[test]
fn unknown_label_is_input_error() {
    let (_dir, h) = seeded_history();
    let o = uca(&["compare", "nosuch", "full", "--history", path(&h)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nosuch"));
}

#[test]
fn markdown_report() {
    let (_dir, h) = seeded_history();
    let args = [
        "report",
        "baseline",
        "partial",
        "full",
        "--history",
        path(&h),
    ];
    let first = uca(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let out = stdout(&first);
    assert!(
        out.contains("| **UCA** | **58.34** | **64.80** | **68.17** | **+16.8%** |"),
        "{out}"
    );
    assert!(out.contains("## Trends"));
    assert!(out.contains("dominant: VULN_SCAN +7.05 (71.7%)"));
    let second = uca(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn single_assessment_json_report() {
    let (_dir, h) = seeded_history();
    let o = uca(&["report", "full", "--format", "json", "--history", path(&h)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(
        (v["composite"].as_f64().unwrap() - 68.17).abs() <= 0.01,
        "{v}"
    );
}

#[test]
fn history_lists_records() {
    let (_dir, h) = seeded_history();
    let o = uca(&["history", "--history", path(&h)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3, "{out}");
    assert!(out.contains("64.80"));

    let o = uca(&["history", "--history", path(&h), "--host", "elsewhere"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("64.80"));
}

#[test]
fn history_skips_corrupt_lines() {
    let (_dir, h) = seeded_history();
    let mut text = std::fs::read_to_string(&h).unwrap();
    text.push_str("{not json\n");
    std::fs::write(&h, text).unwrap();
    let o = uca(&["history", "--history", path(&h)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o)
            .lines()
            .filter(|l| l.contains("node1"))
            .count(),
        3
    );
}
