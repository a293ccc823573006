use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use geotime::distance::eikonal::{distance_eikonal_with, EikonalOptions};
use geotime::distance::fan::{boundary_distances, FanOptions};
use geotime::geodesic::shoot::UnitVectorAt;
use geotime::geodesic::GeodesicSolver;
use geotime::manifold::catalog::Preset;
use geotime::Point;

fn exit_time(c: &mut Criterion) {
    let (spec, domain) = Preset::MildBump.build().unwrap();
    let solver = GeodesicSolver::new(&spec, &domain);
    let init = UnitVectorAt::from_angle(&spec, Point::new(-0.2, 0.1), 0.7).unwrap();
    c.bench_function("exit_time mild_bump", |b| b.iter(|| solver.exit_time(black_box(&init), 10.0).unwrap()));
}

fn fan(c: &mut Criterion) {
    let (spec, domain) = Preset::MildBump.build().unwrap();
    let solver = GeodesicSolver::new(&spec, &domain);
    let targets: Vec<f64> = (0..48).map(|k| k as f64 * 0.04).collect();
    let p = Point::new(0.1, -0.3);
    let mut g = c.benchmark_group("fan");
    g.sample_size(10);
    g.bench_function("48 sensors mild_bump", |b| {
        b.iter(|| boundary_distances(&solver, black_box(&p), &targets, &FanOptions::default()).unwrap())
    });
    g.finish();
}

fn eikonal(c: &mut Criterion) {
    let (spec, domain) = Preset::MildBump.build().unwrap();
    let opts = EikonalOptions { h: 1.0 / 64.0, ..Default::default() };
    let p = Point::new(0.1, -0.3);
    let mut g = c.benchmark_group("eikonal");
    g.sample_size(10);
    g.bench_function("h=1/64 mild_bump", |b| b.iter(|| distance_eikonal_with(&spec, &domain, black_box(&p), &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, exit_time, fan, eikonal);
criterion_main!(benches);
