use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use geotime::data::{generate_dataset, GenerateOptions, Oracle};
use geotime::data::plan::{SensorPlan, SourcePlan};
use geotime::distance::fan::FanOptions;
use geotime::manifold::catalog::Preset;
use geotime::reconstruct::{reconstruct_all, ReconstructOptions};

fn reconstruct(c: &mut Criterion) {
    let (spec, domain) = Preset::Disk.build().unwrap();
    let sources = SourcePlan { h_src: 0.16, ..Default::default() };
    let gen = GenerateOptions { oracle: Oracle::Shooting(FanOptions { directions: 128, ..Default::default() }), ..Default::default() };
    let g = generate_dataset(&spec, &domain, &sources, &SensorPlan::uniform(32), &gen).unwrap();
    let opts = ReconstructOptions { h_src: 0.16, ..Default::default() };
    let mut grp = c.benchmark_group("reconstruct");
    grp.sample_size(10);
    grp.bench_function("disk h_src=0.16 m=32", |b| b.iter(|| reconstruct_all(black_box(&g.dataset), &opts).unwrap()));
    grp.finish();
}

criterion_group!(benches, reconstruct);
criterion_main!(benches);
