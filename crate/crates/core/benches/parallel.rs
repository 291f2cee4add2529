use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multipoint::feynman;
use multipoint::graph_enum::{enumerate_balanced_with, IntMatrix};
use multipoint::par::Exec;
use multipoint::walk_oracle::{mc_unrestricted, SeedSpec};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn monte_carlo_integrals(c: &mut Criterion) {
    let f = IntMatrix::from_rows(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
    let mut g = c.benchmark_group("mc_integrals_r3");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| feynman::integrals(&f, 1 << 15, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn walk_monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc_unrestricted_n1024");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| mc_unrestricted(1024, &[1, 2], SeedSpec { root: 7, stream: 0, samples: 1 << 12 }, exec).unwrap())
        });
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_r4_h3");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| enumerate_balanced_with(4, &[3, 3, 3, 3], exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo_integrals, walk_monte_carlo, enumeration);
criterion_main!(benches);
