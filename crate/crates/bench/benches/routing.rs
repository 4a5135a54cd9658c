use coppertrace_bench::endpoints;
use coppertrace_core::mesh::shapes;
use coppertrace_core::{route_trace, RoutingParams, Vec3};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn plane(c: &mut Criterion) {
    let mesh = shapes::plane_grid(100.0, 100.0, 40, 40);
    let (a, b) = endpoints(&mesh, Vec3::new(7.0, 11.0, 0.0), Vec3::new(93.0, 81.0, 0.0));
    let params = RoutingParams::default();
    c.bench_function("route plane diagonal", |bch| {
        bch.iter(|| route_trace(&mesh, black_box(&a), black_box(&b), &params).unwrap())
    });
}

fn sphere(c: &mut Criterion) {
    let mesh = shapes::icosphere(50.0, 3);
    let (a, b) = endpoints(&mesh, Vec3::new(50.0, 0.0, 0.0), Vec3::new(0.0, 35.0, 35.0));
    let params = RoutingParams::default();
    c.bench_function("route sphere quarter", |bch| {
        bch.iter(|| route_trace(&mesh, black_box(&a), black_box(&b), &params).unwrap())
    });
}

criterion_group!(benches, plane, sphere);
criterion_main!(benches);
