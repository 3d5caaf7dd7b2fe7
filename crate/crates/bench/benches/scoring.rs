use chrono::Utc;
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use uca_bench::vuln_report;
use uca_core::analysis::{decompose_delta, trend_series};
use uca_core::scoring::{aggregate_at, aide_score, normalize_vuln, supplied_scores};
use uca_core::WeightProfile;

fn scoring(c: &mut Criterion) {
    let profile = WeightProfile::default();
    let scan = vuln_report(20, 500);
    c.bench_function("normalize_vuln_500", |b| {
        b.iter(|| normalize_vuln(black_box(&scan), &profile))
    });
    c.bench_function("aide_score", |b| b.iter(|| aide_score(black_box(317))));

    let scores = supplied_scores([59.0, 67.4, 83.4, 82.4, 57.8, 0.0]);
    let now = Utc::now();
    c.bench_function("aggregate", |b| {
        b.iter(|| aggregate_at(black_box(&scores), &profile, "baseline", now).unwrap())
    });
}

fn analysis(c: &mut Criterion) {
    let profile = WeightProfile::default();
    let now = Utc::now();
    let series: Vec<_> = (0..100)
        .map(|i| {
            let v = f64::from(i) % 100.0;
            aggregate_at(&supplied_scores([v; 6]), &profile, &format!("run{i}"), now).unwrap()
        })
        .collect();
    c.bench_function("decompose_delta", |b| {
        b.iter(|| decompose_delta(black_box(&series[0]), black_box(&series[99])).unwrap())
    });
    c.bench_function("trend_series_100", |b| {
        b.iter(|| trend_series(black_box(&series)).unwrap())
    });
}

criterion_group!(benches, scoring, analysis);
criterion_main!(benches);
