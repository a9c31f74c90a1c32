use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use supdiff_bench::{cross_vertices, cube_halfspaces, octant_family, octant_program, ramp_family, silp_ramp};
use supdiff_core::optimality::kkt_certify;
use supdiff_core::rational::{int, ivec, zeros};
use supdiff_core::suprema::{normal_cone_dom, oracle_subdifferential, subdifferential_sup};
use supdiff_core::{EpsSchedule, Polyhedron, WeightScheme};

fn conversion(c: &mut Criterion) {
    let mut g = c.benchmark_group("double_description");
    for n in [3, 4, 5] {
        g.bench_with_input(BenchmarkId::new("cube_h_to_v", n), &n, |b, &n| {
            let h = cube_halfspaces(n);
            b.iter(|| {
                let p = Polyhedron::from_hrep(h.clone(), n).unwrap();
                black_box(p.vrep().vertices.len())
            })
        });
        g.bench_with_input(BenchmarkId::new("cross_v_to_h", n), &n, |b, &n| {
            let v = cross_vertices(n);
            b.iter(|| {
                let p = Polyhedron::from_vrep(v.clone(), vec![], n).unwrap();
                black_box(p.to_hrep().len())
            })
        });
    }
    g.finish();
}

fn subdifferentials(c: &mut Criterion) {
    let mut g = c.benchmark_group("subdifferential");
    g.sample_size(20);
    let schedule = EpsSchedule::default();
    for m in [10, 20] {
        let f = ramp_family(0, m);
        for x in [0, 1] {
            let point = ivec(&[x]);
            g.bench_function(BenchmarkId::new(format!("ramp{m}_sup"), x), |b| {
                b.iter(|| black_box(subdifferential_sup(&f, &point, &schedule, &WeightScheme::Rho).unwrap()))
            });
        }
        g.bench_function(BenchmarkId::new("ramp_oracle", m), |b| {
            b.iter(|| black_box(oracle_subdifferential(&f, &ivec(&[1])).unwrap()))
        });
    }
    let f = octant_family(2);
    let x = vec![int(1), int(0)];
    g.bench_function("octant2_sup", |b| {
        b.iter(|| black_box(subdifferential_sup(&f, &x, &schedule, &WeightScheme::Rho).unwrap()))
    });
    g.finish();
}

fn normal_cones(c: &mut Criterion) {
    let mut g = c.benchmark_group("normal_cone");
    for m in [10, 40] {
        let f = ramp_family(0, m);
        g.bench_with_input(BenchmarkId::new("ramp_weighted", m), &f, |b, f| {
            b.iter(|| black_box(normal_cone_dom(f, &ivec(&[0]), &int(1), &WeightScheme::Rho).unwrap()))
        });
    }
    g.finish();
}

fn kkt(c: &mut Criterion) {
    let mut g = c.benchmark_group("kkt");
    g.sample_size(20);
    let schedule = EpsSchedule::default();
    let prog = silp_ramp(10);
    for x in [0, 1] {
        g.bench_with_input(BenchmarkId::new("silp_ramp10", x), &ivec(&[x]), |b, x| {
            b.iter(|| black_box(kkt_certify(&prog, x, &schedule).unwrap()))
        });
    }
    let prog = octant_program(2);
    g.bench_function("octant2_interior", |b| {
        b.iter(|| black_box(kkt_certify(&prog, &zeros(2), &schedule).unwrap()))
    });
    g.finish();
}

criterion_group!(benches, conversion, subdifferentials, normal_cones, kkt);
criterion_main!(benches);
