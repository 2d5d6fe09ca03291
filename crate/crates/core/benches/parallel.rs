use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hubbard_ness::amplitudes::AmplitudeTable;
use hubbard_ness::exact::{Complex64, GaussianRational};
use hubbard_ness::graph::Coloring;
use hubbard_ness::ness::{build_rho, build_s, Construction, ModelParams};
use hubbard_ness::observables::{site_profiles, TransferMatrix};
use hubbard_ness::par::Exec;
use hubbard_ness::proof::ProofContext;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn rho_product(c: &mut Criterion) {
    let params = ModelParams::new(5, GaussianRational::from_ints(1, 0), GaussianRational::from_ints(4, 0));
    let s = build_s(&params, &Construction::default()).unwrap();
    let mut group = c.benchmark_group("rho_exact_n5");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| build_rho(black_box(&s), exec))
        });
    }
    group.finish();
}

fn local_conditions(c: &mut Criterion) {
    let ctx = ProofContext::new(8, Coloring::alternating(), AmplitudeTable::default()).unwrap();
    let mut group = c.benchmark_group("local_conditions_k8");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| ctx.run(exec)));
    }
    group.finish();
}

fn profiles(c: &mut Criterion) {
    let params = ModelParams::new(8, Complex64::new(1.0, 0.0), Complex64::new(4.0, 0.0));
    let tm = TransferMatrix::new(&params, &Construction::default()).unwrap();
    let mut group = c.benchmark_group("site_profiles_float_n8");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| site_profiles(black_box(&tm), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, rho_product, local_conditions, profiles);
criterion_main!(benches);
