use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gtqc_bench::lifted_cycle;
use gtqc_core::quantum::{
    apply_pauli_string, evolve_graph, evolve_mixing, measure_correlations, prepare_graph_state, GraphHamiltonian,
    HamiltonianKind, Pauli, PauliString, QuantumParams, StateVector,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pauli(c: &mut Criterion) {
    let mut g = c.benchmark_group("pauli");
    for n in [12, 16, 20] {
        let s = StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let p = PauliString::pair(n, 0, Pauli::X, n - 1, Pauli::Y).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| apply_pauli_string(black_box(&s), &p, 1.0.into()).unwrap())
        });
    }
    g.finish();
}

fn evolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolve");
    for n in [12, 15, 18] {
        let graph = lifted_cycle(n, 1);
        let s = StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for kind in [HamiltonianKind::Ising, HamiltonianKind::Xy] {
            let h = GraphHamiltonian::new(&graph, kind).unwrap();
            g.bench_with_input(BenchmarkId::new(kind.to_string(), n), &n, |b, _| {
                b.iter(|| evolve_graph(black_box(&s), &h, 0.7).unwrap())
            });
        }
        g.bench_with_input(BenchmarkId::new("mixing", n), &n, |b, _| b.iter(|| evolve_mixing(black_box(&s), 0.3)));
    }
    g.finish();
}

fn correlations(c: &mut Criterion) {
    let mut g = c.benchmark_group("correlations");
    g.sample_size(10);
    for n in [12, 15, 18, 21] {
        let graph = lifted_cycle(n, 2);
        let qp = QuantumParams::new(vec![0.4, 1.1, 0.8]).unwrap();
        let s = prepare_graph_state(&graph, HamiltonianKind::Ising, &qp).unwrap();
        g.bench_with_input(BenchmarkId::new("measure", n), &n, |b, _| {
            b.iter(|| measure_correlations(black_box(&s)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("prepare", n), &n, |b, _| {
            b.iter(|| prepare_graph_state(black_box(&graph), HamiltonianKind::Ising, &qp).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pauli, evolution, correlations);
criterion_main!(benches);
