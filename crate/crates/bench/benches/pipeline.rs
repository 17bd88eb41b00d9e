use std::time::Duration;

use contact_bench::surfaces;
use contact_core::{
    analyze_field, build_dividing_set, verify_tree_proposition, AnalysisConfig, ContactModel, SegmentReading,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn contact_density(c: &mut Criterion) {
    let m = ContactModel::catalog("ot").unwrap();
    c.bench_function("min_contact_volume/ot/16", |b| {
        b.iter(|| m.min_contact_volume(black_box(16)).unwrap())
    });
}

fn foliation(c: &mut Criterion) {
    let cfg = AnalysisConfig::default();
    let mut g = c.benchmark_group("analyze_field");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    for (name, f) in surfaces() {
        g.bench_function(name, |b| b.iter(|| analyze_field(&f, &cfg).unwrap()));
    }
    g.finish();
}

fn dividing(c: &mut Criterion) {
    let cfg = AnalysisConfig::default();
    let mut g = c.benchmark_group("build_dividing_set");
    g.sample_size(10);
    for (name, f) in surfaces().into_iter().take(2) {
        let a = analyze_field(&f, &cfg).unwrap();
        g.bench_function(name, |b| b.iter(|| build_dividing_set(&a, &cfg).unwrap()));
    }
    g.finish();
}

fn trees(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_tree_proposition");
    g.sample_size(10);
    for n in [4, 5] {
        g.bench_function(format!("n{n}"), |b| {
            b.iter(|| verify_tree_proposition(black_box(n), SegmentReading::InnerSegment))
        });
    }
    g.finish();
}

criterion_group!(benches, contact_density, foliation, dividing, trees);
criterion_main!(benches);
