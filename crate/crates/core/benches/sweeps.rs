use besov_core::wavelet::analyze_with;
use besov_core::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn strategies() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Execution::Parallel));
    v
}

fn wavelet_analysis(c: &mut Criterion) {
    let family = WaveletFamily::spline(3, 3).unwrap();
    let f = eval_corner_singularity(&CornerSingularity::l_shape(), 9, Execution::Sequential).unwrap();
    let mut group = c.benchmark_group("analyze_2d_L9");
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| analyze_with(&f, &family, exec).unwrap())
        });
    }
    group.finish();
}

fn width_sweep(c: &mut Criterion) {
    let source = SpaceParams::finite(1.5, 1.0, 1.0, 1);
    let target = SpaceParams::hilbert(0.0, 1);
    let ns: Vec<usize> = (4..=16).map(|k| 1usize << k).collect();
    let mut group = c.benchmark_group("widths_table_d1");
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| widths_table(&source, &target, &ns, &WidthFamily::Extremal, 0.15, exec).unwrap())
        });
    }
    group.finish();
}

fn oracle_batch(c: &mut Criterion) {
    let st = cube_structure(1, 4).unwrap();
    let target = SpaceParams::hilbert(0.5, 1);
    let batch: Vec<WeightedSequence> = (0..64u64)
        .map(|seed| {
            let entries = (0..14u64).map(|k| (Index::new(3 + (k % 2) as i32, 1, k / 2), ((seed * 31 + k * 17) % 97) as f64 - 48.0));
            WeightedSequence::new(st, entries).unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("bruteforce_batch");
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| exec.map(&batch, |a| sigma_n_bruteforce(a, 5, &target).unwrap().error))
        });
    }
    group.finish();
}

criterion_group!(benches, wavelet_analysis, width_sweep, oracle_batch);
criterion_main!(benches);
