use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crawford_core::{compute_with, hilbert_sweep, EngineOptions, Field, Operator, Quantity, SpaceDescriptor, Strategy};
use num_complex::Complex64 as C64;

fn operator(dim: usize, field: Field, p: f64) -> Operator {
    let s = SpaceDescriptor::lp(dim, field, p).unwrap();
    let rows: Vec<Vec<C64>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let re = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4;
                    let im = if field == Field::Complex { ((i * 5 + j) % 7) as f64 / 7.0 - 0.5 } else { 0.0 };
                    C64::new(re, im)
                })
                .collect()
        })
        .collect();
    Operator::from_rows(s, &rows).unwrap()
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("hilbert_sweep");
    for (name, field) in [("real", Field::Real), ("complex", Field::Complex)] {
        let t = operator(3, field, 2.0);
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| hilbert_sweep(&t, 720).unwrap()));
    }
    g.finish();
}

fn crawford(c: &mut Criterion) {
    let mut g = c.benchmark_group("crawford_auto");
    g.sample_size(10);
    let opts = EngineOptions::default();
    for (label, dim, field, p) in [
        ("real_l1_dim3", 3, Field::Real, 1.0),
        ("real_l3_dim3", 3, Field::Real, 3.0),
        ("complex_linf_dim2", 2, Field::Complex, f64::INFINITY),
        ("complex_l1.5_dim2", 2, Field::Complex, 1.5),
    ] {
        let t = operator(dim, field, p);
        g.bench_function(label, |b| {
            b.iter(|| compute_with(&t, Quantity::Crawford, Strategy::Auto, 1e-6, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sweep, crawford);
criterion_main!(benches);
