use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cr3d::ortho::OrthoCoeffs;
use cr3d::s3::{refl_basis, sym_basis, S3Matrices};
use cr3d::special::m_coeff;

fn bench_m_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("m-matrix");
    for p in [4u32, 8, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| {
                let mut acc = 0.0;
                for i in 0..=p {
                    for j in 0..=p {
                        acc += m_coeff(p, i, j).unwrap();
                    }
                }
                black_box(acc)
            })
        });
    }
    group.finish();
}

fn bench_basis_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("basis-eval");
    for p in [4u32, 8] {
        let coeffs = OrthoCoeffs::new(p, (0..=p).map(|k| 1.0 / (k + 1) as f64).collect()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, _| {
            b.iter(|| {
                let mut acc = 0.0;
                for i in 0..32 {
                    for j in 0..(32 - i) {
                        acc += coeffs.eval_xy(i as f64 / 32.0, j as f64 / 32.0);
                    }
                }
                black_box(acc)
            })
        });
    }
    group.finish();
}

fn bench_decompositions(c: &mut Criterion) {
    c.bench_function("sym-basis-p8", |b| b.iter(|| black_box(sym_basis(8))));
    c.bench_function("refl-basis-p8", |b| {
        b.iter(|| black_box(refl_basis(8).unwrap()))
    });
    c.bench_function("s3-matrices-p12", |b| {
        b.iter(|| black_box(S3Matrices::new(12)))
    });
}

criterion_group!(
    benches,
    bench_m_matrix,
    bench_basis_eval,
    bench_decompositions
);
criterion_main!(benches);
