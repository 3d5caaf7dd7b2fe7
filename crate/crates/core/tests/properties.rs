use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use uca_core::analysis::{decompose_delta, trend_series};
use uca_core::model::{
    AideReport, LynisReport, ScapProfile, ScapReport, TripwireReport, VulnFinding, VulnReport,
};
use uca_core::parsers::{detect_firewall, emit, parse_for_tool, ParseOptions};
use uca_core::scoring::{
    aggregate_at, aide_score, classify_severity, normalize, normalize_lynis, normalize_scap,
    normalize_tripwire, normalize_vuln, supplied_scores,
};
use uca_core::store::{append_record, load_history, HistoryRecord};
use uca_core::{CompositeAssessment, RawToolReport, Severity, ToolKind, WeightProfile};

fn ts() -> chrono::DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 3, 2, 12, 0, 0).unwrap()
}

fn assess(label: &str, col: [f64; 6], profile: &WeightProfile) -> CompositeAssessment {
    aggregate_at(&supplied_scores(col), profile, label, ts()).unwrap()
}

fn column() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(0.0..=100.0f64)
}

fn profile() -> impl Strategy<Value = WeightProfile> {
    prop::array::uniform6(0.0..1.0f64)
        .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| {
            let sum: f64 = w.iter().sum();
            let mut weights: BTreeMap<ToolKind, f64> = ToolKind::ALL
                .into_iter()
                .zip(w)
                .map(|(t, x)| (t, x / sum))
                .collect();
            let rest: f64 = weights
                .iter()
                .filter(|(t, _)| **t != ToolKind::VulnScan)
                .map(|(_, x)| x)
                .sum();
            weights.insert(ToolKind::VulnScan, (1.0 - rest).max(0.0));
            WeightProfile::with_tool_weights(weights)
        })
        .prop_filter("valid", |p| p.validate().is_ok())
}

fn severity() -> impl Strategy<Value = Severity> {
    prop::sample::select(Severity::ALL.to_vec())
}

fn vuln_report() -> impl Strategy<Value = VulnReport> {
    let finding = (
        prop::option::of(0u16..=100),
        severity(),
        any::<bool>(),
        prop::option::of(0usize..4),
        "[a-z]{3,8}( [a-z]{2,8}){0,3}",
    );
    (
        0u64..6,
        prop_oneof![0u64..100, 100u64..70_000],
        prop::collection::vec(finding, 0..12),
    )
        .prop_map(|(open, filtered, raw)| {
            let findings: Vec<VulnFinding> = raw
                .into_iter()
                .enumerate()
                .map(|(i, (cvss10, sev, confirmed, port_idx, description))| {
                    let cvss = cvss10.map(|c| f64::from(c) / 10.0);
                    let severity = cvss.map_or(sev, |c| classify_severity(c).unwrap());
                    let identifier = if i % 3 == 2 {
                        format!("http-vuln-check{i}")
                    } else {
                        format!("CVE-2024-{:05}", 1000 + i)
                    };
                    let port = port_idx
                        .filter(|_| open > 0)
                        .map(|p| 8000 + (p as u64 % open) as u16);
                    VulnFinding {
                        identifier,
                        cvss,
                        severity,
                        confirmed,
                        port,
                        description,
                    }
                })
                .collect();
            VulnReport {
                open_ports: open,
                filtered_ports: filtered,
                firewall_active: detect_firewall(open, filtered, None),
                confirmed_count: findings.iter().filter(|f| f.confirmed).count() as u64,
                findings,
            }
        })
}

fn raw_report() -> impl Strategy<Value = RawToolReport> {
    prop_oneof![
        (0u8..=100).prop_map(|h| RawToolReport::Lynis(LynisReport { hardening_index: h })),
        (0u64..5000, 0u64..5000)
            .prop_filter("nonempty", |(p, f)| p + f > 0)
            .prop_map(|(p, f)| RawToolReport::Scap(ScapReport {
                profile: ScapProfile::Cis,
                pass_count: p,
                fail_count: f,
            })),
        (0u64..1 << 40, 0u64..1 << 40, 0u64..1 << 40).prop_map(|(a, r, c)| {
            RawToolReport::Aide(AideReport {
                added: a,
                removed: r,
                changed: c,
            })
        }),
        (1u64..10_000_000)
            .prop_flat_map(|o| (Just(o), 0..=o))
            .prop_map(|(o, v)| RawToolReport::Tripwire(TripwireReport {
                objects_scanned: o,
                violations: v,
            })),
        vuln_report().prop_map(RawToolReport::Vuln),
    ]
}

fn sorted(mut r: VulnReport) -> VulnReport {
    r.findings.sort_by(|a, b| a.identifier.cmp(&b.identifier));
    r
}

proptest! {
    #[test]
    fn normalized_scores_stay_in_range(raw in raw_report(), p in profile()) {
        let s = normalize(&raw, &p).unwrap();
        prop_assert!((0.0..=100.0).contains(&s.value), "{}", s.value);
    }

    #[test]
    fn composite_stays_in_range(col in column(), p in profile()) {
        let a = assess("x", col, &p);
        prop_assert!(a.composite >= -1e-9 && a.composite <= 100.0 + 1e-9);
    }

    #[test]
    fn lynis_is_monotone(a in 0u8..=100, b in 0u8..=100) {
        let (lo, hi) = (a.min(b), a.max(b));
        let lower = normalize_lynis(&LynisReport { hardening_index: lo }).value;
        let upper = normalize_lynis(&LynisReport { hardening_index: hi }).value;
        prop_assert!(lower <= upper);
    }

    #[test]
    fn scap_falls_with_failures(pass in 0u64..1000, fail in 0u64..1000, extra in 1u64..100) {
        prop_assume!(pass + fail > 0);
        let r = |fail_count| ScapReport { profile: ScapProfile::Standard, pass_count: pass, fail_count };
        prop_assert!(normalize_scap(&r(fail + extra)).unwrap().value
            <= normalize_scap(&r(fail)).unwrap().value);
    }

    #[test]
    fn aide_falls_with_changes(v in 0u64..1 << 50, extra in 1u64..1000) {
        prop_assert!(aide_score(v + extra) <= aide_score(v));
    }

    #[test]
    fn tripwire_falls_with_violations(o in 1u64..1_000_000, frac in 0.0..1.0f64) {
        let v = ((o as f64) * frac) as u64;
        prop_assume!(v < o);
        let r = |violations| TripwireReport { objects_scanned: o, violations };
        prop_assert!(normalize_tripwire(&r(v + 1)).unwrap().value
            <= normalize_tripwire(&r(v)).unwrap().value);
    }

    #[test]
    fn vuln_falls_with_findings(r in vuln_report(), sev in severity(), confirmed in any::<bool>(), ports in 1u64..5) {
        let p = WeightProfile::default();
        let before = normalize_vuln(&r, &p).value;

        let mut more = r.clone();
        more.findings.push(VulnFinding {
            identifier: "CVE-2099-0001".into(),
            cvss: None,
            severity: sev,
            confirmed,
            port: None,
            description: "added".into(),
        });
        more.confirmed_count += u64::from(confirmed);
        prop_assert!(normalize_vuln(&more, &p).value <= before);

        let mut wider = r.clone();
        wider.open_ports += ports;
        prop_assert!(normalize_vuln(&wider, &p).value <= before);
    }

    #[test]
    fn aggregate_is_linear_per_tool(col in column(), p in profile(), idx in 0usize..6, target in 0.0..=100.0f64) {
        let base = assess("a", col, &p);
        let mut moved = col;
        moved[idx] = target;
        let after = assess("b", moved, &p);
        let t = ToolKind::ALL[idx];
        let expect = p.weight(t) * (target - col[idx]);
        prop_assert!((after.composite - base.composite - expect).abs() < 1e-9);
    }

    #[test]
    fn decomposition_sums_to_composite_change(a in column(), b in column(), p in profile()) {
        let from = assess("from", a, &p);
        let to = assess("to", b, &p);
        let d = decompose_delta(&from, &to).unwrap();
        prop_assert!((d.total_delta - (to.composite - from.composite)).abs() < 1e-9);
        let parts: f64 = d.per_tool_delta.values().sum();
        prop_assert!((parts - d.total_delta).abs() < 1e-9);

        let back = decompose_delta(&to, &from).unwrap();
        for t in ToolKind::ALL {
            prop_assert!((d.per_tool_delta[&t] + back.per_tool_delta[&t]).abs() < 1e-9);
        }
        prop_assert_eq!(d.dominant_tool, back.dominant_tool);
    }

    #[test]
    fn repeating_last_assessment_keeps_trend(cols in prop::collection::vec(column(), 2..6)) {
        let p = WeightProfile::default();
        let mut seq: Vec<_> = cols.iter().enumerate().map(|(i, c)| assess(&format!("s{i}"), *c, &p)).collect();
        let before = trend_series(&seq).unwrap();
        seq.push(seq.last().unwrap().clone());
        let after = trend_series(&seq).unwrap();
        prop_assert_eq!(before.composite.direction, after.composite.direction);
        for t in ToolKind::ALL {
            prop_assert_eq!(before.tools[&t].direction, after.tools[&t].direction);
        }
    }

    #[test]
    fn weight_validation_ignores_insertion_order(w in prop::array::uniform6(-0.5..1.0f64), rot in 0usize..6) {
        let forward: BTreeMap<ToolKind, f64> = ToolKind::ALL.into_iter().zip(w).collect();
        let mut pairs: Vec<_> = ToolKind::ALL.into_iter().zip(w).collect();
        pairs.rotate_left(rot);
        let mut rotated = BTreeMap::new();
        for (t, x) in pairs.into_iter().rev() {
            rotated.insert(t, x);
        }
        let a = WeightProfile::with_tool_weights(forward).validate().map_err(|e| e.code());
        let b = WeightProfile::with_tool_weights(rotated).validate().map_err(|e| e.code());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn history_round_trips(cols in prop::collection::vec((column(), "[a-z0-9-]{1,12}", 0i64..4_000_000_000, 0u32..1_000_000_000), 1..8)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.jsonl");
        let p = WeightProfile::default();
        let mut written = Vec::new();
        for (col, label, secs, nanos) in cols {
            let when = Utc.timestamp_opt(secs, nanos).unwrap();
            let a = aggregate_at(&supplied_scores(col), &p, &label, when).unwrap();
            let rec = HistoryRecord::new("node1", a);
            append_record(&path, &rec).unwrap();
            written.push(rec);
        }
        let loaded = load_history(&path, None).unwrap();
        prop_assert_eq!(loaded.skipped, 0);
        prop_assert_eq!(loaded.records, written);
    }

    #[test]
    fn lynis_round_trip(h in 0u8..=100) {
        let r = LynisReport { hardening_index: h };
        let parsed = parse_for_tool(ToolKind::Lynis, &emit::lynis(&r), ParseOptions::default()).unwrap();
        prop_assert_eq!(parsed.report, RawToolReport::Lynis(r));
    }

    #[test]
    fn xccdf_round_trip(pass in 0u64..300, fail in 0u64..300, na in 0u64..20) {
        prop_assume!(pass + fail > 0);
        let doc = emit::xccdf_with(&[("pass", pass), ("notapplicable", na), ("fail", fail)]);
        let parsed = parse_for_tool(ToolKind::OpenscapCis, &doc, ParseOptions::default()).unwrap();
        prop_assert_eq!(parsed.report, RawToolReport::Scap(ScapReport {
            profile: ScapProfile::Cis,
            pass_count: pass,
            fail_count: fail,
        }));
    }

    #[test]
    fn aide_round_trip(a in 0u64..1_000_000, r in 0u64..1_000_000, c in 0u64..1_000_000) {
        let rep = AideReport { added: a, removed: r, changed: c };
        let parsed = parse_for_tool(ToolKind::Aide, &emit::aide(&rep), ParseOptions::default()).unwrap();
        prop_assert_eq!(parsed.report, RawToolReport::Aide(rep));
    }

    #[test]
    fn tripwire_round_trip(o in 1u64..100_000_000, frac in 0.0..=1.0f64) {
        let rep = TripwireReport { objects_scanned: o, violations: ((o as f64) * frac) as u64 };
        let parsed = parse_for_tool(ToolKind::Tripwire, &emit::tripwire(&rep), ParseOptions::default()).unwrap();
        prop_assert_eq!(parsed.report, RawToolReport::Tripwire(rep));
    }

    #[test]
    fn nmap_round_trip(rep in vuln_report()) {
        let doc = emit::nmap(&rep);
        let first = parse_for_tool(ToolKind::VulnScan, &doc, ParseOptions::default()).unwrap();
        let second = parse_for_tool(ToolKind::VulnScan, &doc, ParseOptions::default()).unwrap();
        prop_assert_eq!(&first.report, &second.report);
        let RawToolReport::Vuln(parsed) = first.report else { panic!() };
        prop_assert_eq!(sorted(parsed), sorted(rep));
    }
}
