//! Criterion benchmarks for the evaluation routes: lattice sums, energies,
//! forces, and the regulated mode sum. Geometries are chosen off-square so
//! no route gets a symmetry shortcut.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use casimir_core::{
    energy_ar, energy_cutoff, force_alt, force_finite_l, force_infinite, z2_s3_fast, CutoffFamily,
    CutoffSpec, EnergyRoute, Geometry, PistonGeometry, SeriesControl,
};

fn lattice_routes(c: &mut Criterion) {
    let ctrl = SeriesControl::default();
    let mut group = c.benchmark_group("z2");
    group.bench_function("fast_square", |b| {
        b.iter(|| z2_s3_fast(black_box(1.0), black_box(1.0), ctrl).unwrap())
    });
    group.bench_function("fast_elongated", |b| {
        b.iter(|| z2_s3_fast(black_box(0.2), black_box(1.0), ctrl).unwrap())
    });
    group.finish();
}

fn energy_routes(c: &mut Criterion) {
    let ctrl = SeriesControl::default();
    let g = Geometry::new(0.7, 1.3).unwrap();
    let mut group = c.benchmark_group("energy");
    group.bench_function("zeta_reflection", |b| {
        b.iter(|| energy_ar(black_box(g), EnergyRoute::ZetaReflection, ctrl).unwrap())
    });
    group.bench_function("bessel_series", |b| {
        b.iter(|| energy_ar(black_box(g), EnergyRoute::BesselSeries, ctrl).unwrap())
    });
    group.finish();
}

fn force_routes(c: &mut Criterion) {
    let ctrl = SeriesControl::default();
    let g = Geometry::new(1.2, 1.0).unwrap();
    let piston = PistonGeometry::new(4.0, 1.2, 1.0).unwrap();
    let mut group = c.benchmark_group("force");
    group.bench_function("eq11", |b| {
        b.iter(|| force_infinite(black_box(g), ctrl).unwrap())
    });
    group.bench_function("eq14", |b| {
        b.iter(|| force_alt(black_box(g), ctrl).unwrap())
    });
    group.bench_function("finite_l", |b| {
        b.iter(|| force_finite_l(black_box(piston), ctrl).unwrap())
    });
    group.finish();
}

fn regulated_mode_sum(c: &mut Criterion) {
    let g = Geometry::new(1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("energy_cutoff");
    group.sample_size(10);
    for lambda in [20.0, 50.0] {
        let cut = CutoffSpec::new(lambda, CutoffFamily::InverseQuartic).unwrap();
        group.bench_function(format!("lambda_{lambda}"), |b| {
            b.iter(|| energy_cutoff(black_box(g), black_box(cut)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    lattice_routes,
    energy_routes,
    force_routes,
    regulated_mode_sum
);
criterion_main!(benches);
