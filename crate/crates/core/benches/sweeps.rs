//! Sequential vs. rayon-parallel runs of the three data-parallel workloads:
//! truth-table oracle rows, tree simulation sweeps, and equivalence batches.
//! Without the `parallel` feature only the sequential variants are built.

use std::hint::black_box;

use bddcheck::batch;
use bddcheck::equivalence::check_equivalence;
use bddcheck::gen::{mutate_gate, random_circuit, random_tree, RandomCircuitConfig};
use bddcheck::oracle;
use bddcheck::sim::{simulate, SimOptions};
use bddcheck::Circuit;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn tree_job(n: usize, seed: u64) -> u64 {
    let c = random_tree(n, None, seed).unwrap();
    let opts = SimOptions {
        track_live: false,
        ..SimOptions::default()
    };
    simulate(&c, &c.dfs_variable_order(), &opts).unwrap().stats.created_total
}

fn pair(seed: u64) -> (Circuit, Circuit) {
    let cfg = RandomCircuitConfig {
        inputs: 12,
        gates: 40,
        outputs: 3,
        ..RandomCircuitConfig::default()
    };
    let c = random_circuit(&cfg, seed);
    let d = mutate_gate(&c, seed).unwrap();
    (c, d)
}

fn equivalence_job((c, d): (Circuit, Circuit)) -> bool {
    let out = check_equivalence(&c, &d, &c.dfs_variable_order(), &SimOptions::default()).unwrap();
    out.counterexample.is_some()
}

fn oracle_tables(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("truth_table");
    for inputs in [14usize, 18] {
        let cfg = RandomCircuitConfig {
            inputs,
            gates: 120,
            outputs: 4,
            ..RandomCircuitConfig::default()
        };
        let c = random_circuit(&cfg, 1);
        group.bench_with_input(BenchmarkId::new("seq", inputs), &c, |b, c| {
            b.iter(|| oracle::circuit_truth_table_seq(black_box(c)).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", inputs), &c, |b, c| {
            b.iter(|| oracle::circuit_truth_table(black_box(c)).unwrap())
        });
    }
    group.finish();
}

fn tree_sweep(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("tree_sweep");
    group.sample_size(10);
    for n in [64usize, 256] {
        let seeds: Vec<u64> = (0..32).collect();
        group.bench_with_input(BenchmarkId::new("seq", n), &seeds, |b, seeds| {
            b.iter(|| batch::map_seq(seeds.clone(), |s| tree_job(n, s)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", n), &seeds, |b, seeds| {
            b.iter(|| batch::map_par(seeds.clone(), |s| tree_job(n, s)))
        });
    }
    group.finish();
}

fn equivalence_batch(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("equivalence_batch");
    group.sample_size(10);
    let pairs: Vec<(Circuit, Circuit)> = (0..64).map(pair).collect();
    group.bench_function("seq", |b| b.iter(|| batch::map_seq(pairs.clone(), equivalence_job)));
    #[cfg(feature = "parallel")]
    group.bench_function("par", |b| b.iter(|| batch::map_par(pairs.clone(), equivalence_job)));
    group.finish();
}

criterion_group!(benches, oracle_tables, tree_sweep, equivalence_batch);
criterion_main!(benches);
