// cargo bench -p layout-eval-bench
// cargo bench -p layout-eval-bench -- --save-baseline main

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use layout_eval_bench::{ground_truth, original, prediction, registry};
use layout_eval_core::{
    build_tables, decode_label_image, encode_label_image, encode_png, evaluate, render_error_map, render_overlay,
    Palette, Role,
};

const SIZES: [(u32, u32); 2] = [(500, 400), (2000, 1600)];

fn bench_metrics(c: &mut Criterion) {
    let reg = registry();
    let mut group = c.benchmark_group("metrics");
    for (w, h) in SIZES {
        let gt = ground_truth(w, h, 1);
        let pred = prediction(&gt, 0.02, 2);
        group.throughput(Throughput::Elements(u64::from(w * h)));
        group.bench_with_input(BenchmarkId::new("build_tables", w * h), &(), |b, _| {
            b.iter(|| build_tables(&gt, &pred, &reg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("evaluate", w * h), &(), |b, _| {
            b.iter(|| evaluate(&gt, &pred, &reg).unwrap())
        });
    }
    group.finish();
}

fn bench_codec(c: &mut Criterion) {
    let reg = registry();
    let mut group = c.benchmark_group("codec");
    group.sample_size(20);
    for (w, h) in SIZES {
        let gt = ground_truth(w, h, 1);
        let png = encode_png(&encode_label_image(&gt, &reg)).unwrap();
        group.throughput(Throughput::Elements(u64::from(w * h)));
        group.bench_with_input(BenchmarkId::new("decode_png", w * h), &png, |b, png| {
            b.iter(|| decode_label_image(png, &reg, Role::GroundTruth).unwrap())
        });
    }
    group.finish();
}

fn bench_visualization(c: &mut Criterion) {
    let reg = registry();
    let palette = Palette::default();
    let mut group = c.benchmark_group("visualization");
    for (w, h) in SIZES {
        let gt = ground_truth(w, h, 1);
        let pred = prediction(&gt, 0.02, 2);
        let page = original(&gt, 3);
        let map = render_error_map(&gt, &pred, &reg, &palette).unwrap();
        group.throughput(Throughput::Elements(u64::from(w * h)));
        group.bench_with_input(BenchmarkId::new("error_map", w * h), &(), |b, _| {
            b.iter(|| render_error_map(&gt, &pred, &reg, &palette).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("overlay", w * h), &(), |b, _| {
            b.iter(|| render_overlay(&map, &page, 0.5).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_metrics, bench_codec, bench_visualization);
criterion_main!(benches);
