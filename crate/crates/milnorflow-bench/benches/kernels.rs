use criterion::{black_box, criterion_group, criterion_main, Criterion};

use milnorflow::dynamics::{integrate, IntegratorConfig};
use milnorflow::milnor_bundle::{BundleSpec, FibrationField};
use milnorflow::{build_gamma, MulticentreField, SullivanField};
use milnorflow_bench::{frame_points, s7_points};

fn curve_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_gamma");
    g.sample_size(10);
    for lambda in [1.0, 3.0, 5.0] {
        g.bench_function(format!("lambda={lambda}"), |b| {
            b.iter(|| build_gamma(black_box(lambda)).unwrap())
        });
    }
    g.finish();
}

fn field_eval(c: &mut Criterion) {
    let sullivan = SullivanField::new(2.0).unwrap();
    let frames = frame_points(64, 1);
    c.bench_function("sullivan eval x64", |b| {
        b.iter(|| {
            frames
                .iter()
                .map(|p| sullivan.eval(black_box(p)).unwrap().q.x)
                .sum::<f64>()
        })
    });
    let fibration = FibrationField::new(BundleSpec::E01).unwrap();
    let zs = s7_points(64, 0.5, 2);
    fibration.eval_s7(&zs[0]).unwrap();
    c.bench_function("fibration eval x64", |b| {
        b.iter(|| {
            zs.iter()
                .map(|z| fibration.eval_s7(black_box(z)).unwrap()[0])
                .sum::<f64>()
        })
    });
    let multicentre = MulticentreField::new();
    let xs: Vec<_> = zs.iter().map(|z| z * 0.5).collect();
    c.bench_function("multicentre eval x64", |b| {
        b.iter(|| {
            xs.iter()
                .map(|x| multicentre.eval(black_box(x)).unwrap()[0])
                .sum::<f64>()
        })
    });
}

fn orbit_segment(c: &mut Criterion) {
    let z = s7_points(1, 0.0, 3)[0];
    let field = FibrationField::new(BundleSpec::E01).unwrap().at_level(&z).unwrap();
    let cfg = IntegratorConfig {
        rtol: 1e-12,
        atol: 1e-14,
        ..IntegratorConfig::default()
    };
    let mut g = c.benchmark_group("dop853");
    g.sample_size(20);
    g.bench_function("fibration orbit t=100", |b| {
        b.iter(|| integrate(&field, black_box(z.as_slice()), 100.0, &cfg).unwrap().steps)
    });
    g.finish();
}

criterion_group!(kernels, curve_build, field_eval, orbit_segment);
criterion_main!(kernels);
