//! Parallel vs sequential throughput of the per-year metric pipeline.
//!
//! `metrics_for_years` fans out across the rayon pool when ecomplex-core is
//! built with its default `parallel` feature; `metrics_for_years_seq` is the
//! always-sequential fallback. With `--no-default-features` on the core crate
//! both lanes run sequentially and the comparison collapses, as expected.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ecomplex_core::complexity::MetricParams;
use ecomplex_core::pipeline::{metrics_for_years, metrics_for_years_seq};
use ecomplex_harness::{gen_firm_records, FixtureSpec};

fn year_batch(c: &mut Criterion) {
    let spec = FixtureSpec {
        regions: 31,
        industries: 70,
        noise: 0.1,
        seed: 11,
        year_from: 2000,
        year_to: 2015,
        inequality_year: 2010,
    };
    let records = gen_firm_records(&spec).expect("valid fixture spec");
    let years: Vec<i32> = (spec.year_from..=spec.year_to).collect();
    let params = MetricParams::default();

    let mut group = c.benchmark_group("year_batch");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", years.len()), &years, |b, years| {
        b.iter(|| {
            let out = metrics_for_years(black_box(&records), years, &params);
            assert!(out.iter().all(|(_, r)| r.is_ok()));
            out
        })
    });
    group.bench_with_input(BenchmarkId::new("sequential", years.len()), &years, |b, years| {
        b.iter(|| {
            let out = metrics_for_years_seq(black_box(&records), years, &params);
            assert!(out.iter().all(|(_, r)| r.is_ok()));
            out
        })
    });
    group.finish();
}

fn seed_sweep(c: &mut Criterion) {
    use ecomplex_core::{binarize, complexity, rca};
    use ecomplex_harness::{gen_noisy_nested, SynthSpec};
    use rayon::prelude::*;

    let matrices: Vec<_> = (0..32u64)
        .map(|seed| {
            let spec = SynthSpec::new(25, 40, 0.1, seed).unwrap();
            let (pruned, _) = gen_noisy_nested(&spec).prune_zero_lines();
            binarize(&rca(&pruned).unwrap(), 1.0)
        })
        .collect();
    let solve =
        |m: &ecomplex_core::AdvantageMatrix| complexity::eci(m, 1e-10).map(|r| r.second_eigenvalue);

    let mut group = c.benchmark_group("eci_seed_sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| matrices.par_iter().map(|m| solve(m).unwrap()).sum::<f64>())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| matrices.iter().map(|m| solve(m).unwrap()).sum::<f64>())
    });
    group.finish();
}

criterion_group!(benches, year_batch, seed_sweep);
criterion_main!(benches);
