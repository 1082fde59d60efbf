use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};

use cardiopipe_core::blackboard::{run_pipeline, PipelineConfig};
use cardiopipe_core::ingest::{parse_raw, serialize_raw, AttributeSchema};
use cardiopipe_core::nbc;
use cardiopipe_core::preprocess::{discretize, filter_select, wrapper_select, SelectionConfig};
use cardiopipe_core::significance::{rank_symptoms, SignificanceMode};
use cardiopipe_core::synth;

fn bench_parse_raw(c: &mut Criterion) {
    let dataset = synth::cleveland();
    let text = serialize_raw(&dataset);
    let schema = AttributeSchema::heart76();
    let mut group = c.benchmark_group("ingest");
    group.throughput(Throughput::Bytes(text.len() as u64));
    group.bench_function("parse_raw/cleveland", |b| {
        b.iter(|| {
            let parsed = parse_raw(black_box(&text), &schema, "cleveland").unwrap();
            black_box(parsed.len());
        });
    });
    group.finish();
}

fn bench_selection(c: &mut Criterion) {
    let dataset = synth::cleveland();
    let config = SelectionConfig::default();
    let view = discretize(&dataset, 4).unwrap();
    let filtered = filter_select(&dataset, &view, &config).unwrap();
    let mut group = c.benchmark_group("selection");
    group.bench_function("discretize/cleveland", |b| {
        b.iter(|| black_box(discretize(&dataset, 4).unwrap()));
    });
    group.bench_function("filter_select/cleveland", |b| {
        b.iter(|| black_box(filter_select(&dataset, &view, &config).unwrap()));
    });
    group.sample_size(20);
    group.bench_function("wrapper_select/cleveland", |b| {
        b.iter(|| black_box(wrapper_select(&view, &filtered, &config).unwrap()));
    });
    group.finish();
}

fn bench_significance(c: &mut Criterion) {
    let dataset = synth::cleveland();
    let config = SelectionConfig::default();
    let view = discretize(&dataset, 4).unwrap();
    let subset = filter_select(&dataset, &view, &config).unwrap();
    c.bench_function("rank_symptoms/cleveland", |b| {
        b.iter(|| black_box(rank_symptoms(&view, &subset, SignificanceMode::default()).unwrap()));
    });
}

fn bench_classifier(c: &mut Criterion) {
    let dataset = synth::cleveland();
    let config = SelectionConfig::default();
    let view = discretize(&dataset, 4).unwrap();
    let filtered = filter_select(&dataset, &view, &config).unwrap();
    let (subset, _) = wrapper_select(&view, &filtered, &config).unwrap();
    let model = nbc::fit(&view, &subset, 1.0).unwrap();
    let mut group = c.benchmark_group("classifier");
    group.bench_function("fit/cleveland", |b| {
        b.iter(|| black_box(nbc::fit(&view, &subset, 1.0).unwrap()));
    });
    group.throughput(Throughput::Elements(dataset.len() as u64));
    group.bench_function("posterior/cleveland-all-records", |b| {
        b.iter(|| {
            for record in dataset.records() {
                black_box(model.posterior(record));
            }
        });
    });
    group.finish();
}

fn bench_full_pipeline(c: &mut Criterion) {
    let config = PipelineConfig::default();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("run_pipeline/cleveland", |b| {
        b.iter(|| {
            let outcome = run_pipeline(synth::cleveland(), &config).unwrap();
            black_box(outcome.report.evaluation.metrics.accuracy);
        });
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_parse_raw,
    bench_selection,
    bench_significance,
    bench_classifier,
    bench_full_pipeline
);
criterion_main!(benches);
